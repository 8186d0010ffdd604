"""Smoke test for the pyvhdlkern bindings.

Build and install first:
    pip install --no-build-isolation -e crates/python
then run:
    python python/smoke_test.py
"""

import math
import pathlib

import pyvhdlkern as vk

CORPUS = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "corpus"

MNXY = """
entity mnxy is end mnxy;
architecture behav of mnxy is
  signal m, n, x, y : integer := 0;
begin
  p : process (m, n)
  begin
    m <= 1;
    n <= 2;
    x <= m + n;
    m <= 3;
    y <= m + n;
  end process;
end behav;
"""


def delta_example():
    sim = vk.Simulator.from_source(MNXY)
    assert sim.top == "mnxy"
    deltas = sim.step()
    assert deltas == 2, deltas
    got = [sim.int_value(s) for s in "mnxy"]
    assert got == [3, 2, 5, 5], got


def factorial(n):
    sim = vk.Simulator([CORPUS / "factorial" / "factorial.vhd"], clock="clk")
    sim.set("start", 1)
    sim.set("n", n)
    sim.step()
    for _ in range(10 * n + 20):
        sim.step()
        if sim.cycle == 3:
            sim.set("start", "'0'")
        if sim.cycle > 3 and sim.int_value("done") == 1:
            return sim.int_value("result")
    raise AssertionError(f"factorial({n}) never finished")


def errors():
    try:
        vk.Simulator.from_source("entity e is end e; architecture a of e is begin x <= 1; end a;")
    except vk.SourceError as e:
        assert "x" in str(e)
    else:
        raise AssertionError("undeclared signal accepted")
    osc = vk.Simulator.from_source(
        "entity o is end o; architecture a of o is signal t : bit := '0'; "
        "begin p : process (t) begin t <= not t; end process; end a;",
        delta_limit=10,
    )
    try:
        osc.step()
    except vk.SimulationError as e:
        assert "delta cycle limit" in str(e)
    else:
        raise AssertionError("oscillator did not diverge")


def main():
    assert vk.resolve("0Z") == "0"
    assert vk.resolve("01") == "X"
    assert vk.resolve("LH") == "W"
    delta_example()
    for n in (0, 1, 5, 10):
        assert factorial(n) == math.factorial(n), n
    errors()
    print("pyvhdlkern smoke test passed")


if __name__ == "__main__":
    main()
