//! Value change dump output. One time unit is one cycle; every promotion
//! recorded in the trace becomes a value change at its cycle's timestamp.

use indexmap::IndexMap;
use std::io;

use vcd::{IdCode, Value, VarType, Writer};

use crate::kernel::Trace;
use crate::logic9::Logic9;
use crate::values::{Scalar, Val};

fn bit(l: Logic9) -> Value {
    match l {
        Logic9::Zero | Logic9::L => Value::V0,
        Logic9::One | Logic9::H => Value::V1,
        Logic9::Z => Value::Z,
        _ => Value::X,
    }
}

fn scalar_bit(s: &Scalar) -> Option<Value> {
    match s {
        Scalar::Logic(l) => Some(bit(*l)),
        Scalar::Bit(b) | Scalar::Bool(b) => Some(if *b { Value::V1 } else { Value::V0 }),
        _ => None,
    }
}

enum Kind {
    Bits(u32),
    Int,
    Real,
    Str,
}

fn kind_of(v: &Val) -> Kind {
    match v {
        Val::Scalar(Scalar::Int(_)) | Val::Scalar(Scalar::Time(_)) => Kind::Int,
        Val::Scalar(Scalar::Real(_)) => Kind::Real,
        Val::Scalar(s) if scalar_bit(s).is_some() => Kind::Bits(1),
        v if v.is_vector() && v.elems().iter().all(|e| e.as_scalar().and_then(scalar_bit).is_some()) => {
            Kind::Bits(v.len().max(1) as u32)
        }
        _ => Kind::Str,
    }
}

fn write_change<W: io::Write>(w: &mut Writer<W>, id: IdCode, v: &Val) -> io::Result<()> {
    match (kind_of(v), v) {
        (Kind::Int, Val::Scalar(Scalar::Int(i) | Scalar::Time(i))) => {
            let bits = (0..64)
                .rev()
                .map(|k| if (*i >> k) & 1 == 1 { Value::V1 } else { Value::V0 });
            w.change_vector(id, bits)
        }
        (Kind::Real, Val::Scalar(Scalar::Real(r))) => w.change_real(id, *r),
        (Kind::Bits(1), Val::Scalar(s)) => w.change_scalar(id, scalar_bit(s).unwrap_or(Value::X)),
        (Kind::Bits(_), v) => {
            let bits: Vec<Value> = v
                .written()
                .into_iter()
                .map(|e| e.as_scalar().and_then(scalar_bit).unwrap_or(Value::X))
                .collect();
            w.change_vector(id, bits)
        }
        _ => w.change_string(id, &v.to_string().replace(' ', "_")),
    }
}

/// Writes the trace of design `top`, whose signal values before the first
/// cycle were `initial`.
pub fn write_vcd<W: io::Write>(out: W, top: &str, initial: &IndexMap<String, Val>, trace: &Trace) -> io::Result<()> {
    let mut w = Writer::new(out);
    w.comment("1 time unit = 1 simulation cycle")?;
    w.timescale(1, vcd::TimescaleUnit::NS)?;
    w.add_module(top)?;
    let mut names: Vec<&String> = initial.keys().collect();
    names.sort();
    let mut ids: IndexMap<String, IdCode> = IndexMap::new();
    for n in names {
        let v = &initial[n];
        let (ty, width) = match kind_of(v) {
            Kind::Bits(n) => (VarType::Wire, n),
            Kind::Int => (VarType::Integer, 64),
            Kind::Real => (VarType::Real, 64),
            Kind::Str => (VarType::String, 1),
        };
        let id = w.add_var(ty, width, n, None)?;
        ids.insert(n.clone(), id);
    }
    w.upscope()?;
    w.enddefinitions()?;
    w.timestamp(0)?;
    w.begin(vcd::SimulationCommand::Dumpvars)?;
    for (n, id) in &ids {
        write_change(&mut w, *id, &initial[n])?;
    }
    w.end()?;
    let mut last = 0;
    for r in &trace.records {
        if r.transitions.is_empty() {
            continue;
        }
        if r.cycle != last {
            w.timestamp(r.cycle)?;
            last = r.cycle;
        }
        for (n, v) in &r.transitions {
            if let Some(id) = ids.get(n) {
                write_change(&mut w, *id, v)?;
            }
        }
    }
    w.flush()
}

/// Replays a VCD and returns the final value of every variable, rendered
/// as `0`/`1`/`x`/`z` strings for bit vectors, decimal for integers.
pub fn replay_final(text: &str) -> io::Result<IndexMap<String, String>> {
    let mut p = vcd::Parser::new(text.as_bytes());
    let header = p.parse_header()?;
    let mut names: IndexMap<IdCode, (String, VarType)> = IndexMap::new();
    for item in &header.items {
        if let vcd::ScopeItem::Scope(s) = item {
            for c in &s.items {
                if let vcd::ScopeItem::Var(v) = c {
                    names.insert(v.code, (v.reference.clone(), v.var_type));
                }
            }
        }
    }
    let mut out: IndexMap<String, String> = IndexMap::new();
    for cmd in p {
        let (id, s) = match cmd? {
            vcd::Command::ChangeScalar(id, v) => (id, v.to_string()),
            vcd::Command::ChangeVector(id, v) => (id, v.iter().map(|b| b.to_string()).collect()),
            vcd::Command::ChangeReal(id, r) => (id, format!("{r:?}")),
            vcd::Command::ChangeString(id, s) => (id, s),
            _ => continue,
        };
        if let Some((n, ty)) = names.get(&id) {
            let s = if *ty == VarType::Integer {
                i64::from_str_radix(&s, 2)
                    .or_else(|_| u64::from_str_radix(&s, 2).map(|u| u as i64))
                    .map(|i| i.to_string())
                    .unwrap_or(s)
            } else {
                s
            };
            out.insert(n.clone(), s);
        }
    }
    Ok(out)
}

/// The rendering [`replay_final`] uses, for comparison against a state.
pub fn vcd_text(v: &Val) -> String {
    match (kind_of(v), v) {
        (Kind::Int, Val::Scalar(Scalar::Int(i) | Scalar::Time(i))) => i.to_string(),
        (Kind::Real, Val::Scalar(Scalar::Real(r))) => format!("{r:?}"),
        (Kind::Bits(1), Val::Scalar(s)) => scalar_bit(s).unwrap_or(Value::X).to_string(),
        (Kind::Bits(_), v) => v
            .written()
            .into_iter()
            .map(|e| e.as_scalar().and_then(scalar_bit).unwrap_or(Value::X).to_string())
            .collect(),
        _ => v.to_string().replace(' ', "_"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DeltaRecord;
    use crate::types::Dir;

    #[test]
    fn unchanged_signal_has_no_change_records() {
        let mut init = IndexMap::new();
        init.insert("a".to_string(), Val::logic(Logic9::Zero));
        init.insert("clk".to_string(), Val::logic(Logic9::Zero));
        let mut t = Trace::new(true);
        for c in 1..=2 {
            t.records.push(DeltaRecord {
                cycle: c,
                delta: 0,
                active: vec!["clk".into()],
                transitions: vec![("clk".into(), Val::logic(Logic9::from_bool(c % 2 == 1)))],
            });
        }
        let mut buf = Vec::new();
        write_vcd(&mut buf, "top", &init, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let body = text.split("$enddefinitions").nth(1).unwrap();
        let after_dump = body.split("$end").skip(2).collect::<Vec<_>>().join("$end");
        // clk is `"`... id codes are `!` for a and `"` for clk
        assert_eq!(after_dump.matches('"').count(), 2, "{text}");
        assert_eq!(after_dump.matches('!').count(), 0, "{text}");
        let fin = replay_final(&text).unwrap();
        assert_eq!(fin["clk"], "0");
        assert_eq!(fin["a"], "0");
    }

    #[test]
    fn vectors_are_one_b_record() {
        let mut init = IndexMap::new();
        init.insert("v".to_string(), Val::logic_vec(Dir::Downto, "00000000"));
        let mut t = Trace::new(true);
        t.records.push(DeltaRecord {
            cycle: 1,
            delta: 1,
            active: vec![],
            transitions: vec![("v".into(), Val::logic_vec(Dir::Downto, "1010X01Z"))],
        });
        let mut buf = Vec::new();
        write_vcd(&mut buf, "top", &init, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("$var wire 8 ! v $end"), "{text}");
        assert!(text.contains("#1\nb1010x01z !"), "{text}");
        assert_eq!(replay_final(&text).unwrap()["v"], "1010x01z");
    }
}
