//! Parsing and elaboration of small sources: accepted features and the
//! diagnostics for what lies outside the subset.

use std::sync::Arc;

use vhdlkern::frontend::{load_sources, Loaded, SourceUnit};
use vhdlkern::kernel::SimConfig;
use vhdlkern::sim::Simulator;

fn load(src: &str) -> Result<Loaded, String> {
    load_sources(vec![SourceUnit::new("t.vhd", src)], Default::default()).map_err(|e| e.render(false))
}

fn wrap(decls: &str, body: &str) -> String {
    format!(
        "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\n\
         entity t is\n  port (clk : in std_logic; q : out integer);\nend t;\n\
         architecture a of t is\n{decls}\nbegin\n{body}\nend a;\n"
    )
}

fn final_dump(src: &str, cycles: u64) -> String {
    let l = load(src).unwrap_or_else(|e| panic!("{e}"));
    let top = l.default_top().unwrap();
    let cfg = SimConfig {
        clock: Some("clk".into()),
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(Arc::new(l.registry), &top, cfg).unwrap();
    sim.run(cycles).unwrap();
    sim.dump()
}

fn error_of(src: &str) -> String {
    match load(src) {
        Ok(_) => panic!("accepted:\n{src}"),
        Err(e) => e,
    }
}

#[test]
fn while_loop_with_variables() {
    let src = wrap(
        "",
        "  p : process (clk)\n    variable i, s : integer;\n  begin\n    i := 0; s := 0;\n    \
         while i < 5 loop\n      i := i + 1;\n      s := s + i * i;\n    end loop;\n    q <= s;\n  end process;",
    );
    assert!(final_dump(&src, 2).contains("q = 55"));
}

#[test]
fn downto_slices_and_concatenation() {
    let src = wrap(
        "  signal v : std_logic_vector(7 downto 0) := \"10110001\";\n  signal w : std_logic_vector(7 downto 0);",
        "  w <= v(3 downto 0) & v(7 downto 4);\n  q <= to_integer(unsigned(w));",
    );
    let d = final_dump(&src, 2);
    assert!(d.contains("w = \"00011011\""), "{d}");
    assert!(d.contains("q = 27"), "{d}");
}

#[test]
fn to_ranges_keep_their_order() {
    let src = wrap(
        "  signal v : std_logic_vector(0 to 3) := \"1000\";\n  signal b : std_logic;",
        "  b <= v(0);\n  q <= to_integer(unsigned(v));",
    );
    let d = final_dump(&src, 1);
    assert!(d.contains("b = '1'"), "{d}");
    assert!(d.contains("q = 8"), "{d}");
}

#[test]
fn records_and_field_assignment() {
    let src = wrap(
        "  type pair is record\n    lo : integer;\n    hi : integer;\n  end record;\n  signal r : pair := (lo => 0, hi => 0);",
        "  p : process (clk)\n    variable v : pair;\n  begin\n    v.lo := 3;\n    v.hi := 4;\n    r <= v;\n  end process;\n  \
         q <= r.lo * r.hi;",
    );
    let d = final_dump(&src, 2);
    assert!(
        d.contains("r.lo = 3") && d.contains("r.hi = 4") && d.contains("q = 12"),
        "{d}"
    );
}

#[test]
fn conditional_assignment_chain() {
    let src = wrap(
        "  signal i : integer := 2;",
        "  q <= 10 when i > 3 else 20 when i = 2 else 30;",
    );
    assert!(final_dump(&src, 1).contains("q = 20"));
}

#[test]
fn generic_less_component_instance() {
    let src = "entity inc is\n  port (a : in integer; b : out integer);\nend inc;\n\
               architecture a of inc is\nbegin\n  b <= a + 1;\nend a;\n\
               entity top is\n  port (y : out integer);\nend top;\n\
               architecture a of top is\n  component inc\n    port (a : in integer; b : out integer);\n  end component;\n  \
               signal x : integer := 41;\nbegin\n  u : inc port map (a => x, b => y);\nend a;\n";
    let l = load(src).unwrap();
    assert_eq!(l.default_top().as_deref(), Some("top"));
    let mut sim = Simulator::new(Arc::new(l.registry), "top", SimConfig::default()).unwrap();
    sim.run(3).unwrap();
    assert_eq!(sim.value("y").and_then(|v| v.as_int()), Some(42));
}

#[test]
fn names_are_case_insensitive() {
    let src = wrap("  SIGNAL Cnt : INTEGER := 7;", "  Q <= cnt + CNT;");
    assert!(final_dump(&src, 1).contains("q = 14"));
}

#[test]
fn undeclared_names_are_located() {
    let e = error_of(&wrap("", "  q <= nosuch;"));
    assert!(e.contains("t.vhd:10:") && e.contains("undeclared name `nosuch`"), "{e}");
}

#[test]
fn outside_the_subset() {
    let cases = [
        (wrap("", "  p : process\n  begin\n    wait;\n  end process;"), "wait"),
        (wrap("", "  q <= 1 after 5 ns;"), "after"),
        (
            wrap(
                "  signal s : integer;",
                "  p : process (clk)\n  begin\n    s <= 1, 2;\n  end process;",
            ),
            "waveform",
        ),
        (
            wrap(
                "  function f(a : integer) return integer is\n  begin\n    return a;\n  end function;\n  \
                 function f(a : bit) return integer is\n  begin\n    return 0;\n  end function;",
                "",
            ),
            "overloading",
        ),
        ("package p is\nend p;\n".to_string(), "package"),
    ];
    for (src, needle) in cases {
        let e = error_of(&src);
        assert!(e.contains(needle), "expected `{needle}` in:\n{e}");
        assert!(e.contains("error:"), "{e}");
    }
}

#[test]
fn signal_assignment_in_a_function_is_rejected() {
    let src = wrap(
        "  signal s : integer;\n  function f(a : integer) return integer is\n  begin\n    s <= a;\n    return a;\n  end function;",
        "  q <= f(1);",
    );
    let e = error_of(&src);
    assert!(e.contains("signal"), "{e}");
}

#[test]
fn type_errors_are_reported() {
    let e = error_of(&wrap("  signal v : std_logic_vector(3 downto 0);", "  v <= 5;"));
    assert!(e.contains("error:"), "{e}");
    let e = error_of(&wrap("  signal v : std_logic_vector(3 downto 0);", "  v <= \"101\";"));
    assert!(e.contains("error:"), "{e}");
}
