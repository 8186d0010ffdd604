//! Static type descriptors for declared objects.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::logic9::Logic9;
use crate::values::{EvalError, Scalar, Val};

/// Index direction of an array type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dir {
    To,
    Downto,
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::To => "to",
            Dir::Downto => "downto",
        })
    }
}

/// Kind of a scalar value, used for type checks on vector elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Bit,
    Bool,
    Char,
    Int,
    Real,
    Time,
    Logic,
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarKind::Bit => "bit",
            ScalarKind::Bool => "boolean",
            ScalarKind::Char => "character",
            ScalarKind::Int => "integer",
            ScalarKind::Real => "real",
            ScalarKind::Time => "time",
            ScalarKind::Logic => "std_logic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Type {
    Bit,
    Boolean,
    Character,
    Integer {
        lo: i64,
        hi: i64,
    },
    Real,
    Time,
    Logic,
    /// `range` holds the declared `(low, high)` index bounds; `None` for an
    /// unconstrained formal parameter.
    Vector {
        dir: Dir,
        range: Option<(i64, i64)>,
        elem: Box<Type>,
    },
    Record {
        fields: Vec<(String, Type)>,
    },
}

impl Type {
    pub fn integer() -> Type {
        Type::Integer {
            lo: i64::MIN,
            hi: i64::MAX,
        }
    }

    pub fn natural() -> Type {
        Type::Integer { lo: 0, hi: i64::MAX }
    }

    pub fn positive() -> Type {
        Type::Integer { lo: 1, hi: i64::MAX }
    }

    pub fn vector(dir: Dir, low: i64, high: i64, elem: Type) -> Type {
        Type::Vector {
            dir,
            range: Some((low, high)),
            elem: Box::new(elem),
        }
    }

    /// `std_logic_vector(high downto low)`.
    pub fn logic_vec(high: i64, low: i64) -> Type {
        Type::vector(Dir::Downto, low, high, Type::Logic)
    }

    pub fn bit_vec(high: i64, low: i64) -> Type {
        Type::vector(Dir::Downto, low, high, Type::Bit)
    }

    pub fn scalar_kind(&self) -> Option<ScalarKind> {
        Some(match self {
            Type::Bit => ScalarKind::Bit,
            Type::Boolean => ScalarKind::Bool,
            Type::Character => ScalarKind::Char,
            Type::Integer { .. } => ScalarKind::Int,
            Type::Real => ScalarKind::Real,
            Type::Time => ScalarKind::Time,
            Type::Logic => ScalarKind::Logic,
            _ => return None,
        })
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, Type::Vector { .. })
    }

    pub fn is_record(&self) -> bool {
        matches!(self, Type::Record { .. })
    }

    /// Number of elements for a constrained vector type.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self {
            Type::Vector {
                range: Some((lo, hi)), ..
            } => Some(if hi < lo { 0 } else { (hi - lo + 1) as usize }),
            _ => None,
        }
    }

    /// Low index bound of a constrained vector.
    pub fn low(&self) -> Option<i64> {
        match self {
            Type::Vector {
                range: Some((lo, _)), ..
            } => Some(*lo),
            _ => None,
        }
    }

    pub fn dir(&self) -> Option<Dir> {
        match self {
            Type::Vector { dir, .. } => Some(*dir),
            _ => None,
        }
    }

    pub fn elem(&self) -> Option<&Type> {
        match self {
            Type::Vector { elem, .. } => Some(elem),
            _ => None,
        }
    }

    /// The implicit initial value: the leftmost value of the type.
    pub fn default_value(&self) -> Val {
        match self {
            Type::Bit => Val::Scalar(Scalar::Bit(false)),
            Type::Boolean => Val::Scalar(Scalar::Bool(false)),
            Type::Character => Val::Scalar(Scalar::Char('\0')),
            Type::Integer { lo, .. } => Val::Scalar(Scalar::Int(*lo)),
            Type::Real => Val::Scalar(Scalar::Real(0.0)),
            Type::Time => Val::Scalar(Scalar::Time(0)),
            Type::Logic => Val::Scalar(Scalar::Logic(Logic9::U)),
            Type::Vector { dir, elem, .. } => {
                let n = self.len().unwrap_or(0);
                Val::from_storage(*dir, vec![elem.default_value(); n])
            }
            Type::Record { fields } => {
                Val::Record(fields.iter().map(|(n, t)| (n.clone(), t.default_value())).collect())
            }
        }
    }

    /// Checks that `v` may be stored in an object of this type and returns
    /// it normalized to the declared direction (positional association keeps
    /// the written order).
    pub fn conform(&self, v: Val) -> Result<Val, EvalError> {
        match (self, v) {
            (Type::Integer { lo, hi }, Val::Scalar(Scalar::Int(i))) => {
                if i < *lo || i > *hi {
                    Err(EvalError::RangeViolation {
                        value: i,
                        lo: *lo,
                        hi: *hi,
                    })
                } else {
                    Ok(Val::Scalar(Scalar::Int(i)))
                }
            }
            (Type::Vector { dir, elem, .. }, v @ (Val::VecTo(_) | Val::VecDownto(_))) => {
                if let Some(n) = self.len() {
                    if v.len() != n {
                        return Err(EvalError::LengthMismatch {
                            op: "assignment",
                            left: n,
                            right: v.len(),
                        });
                    }
                }
                let v = v.with_dir(*dir);
                let (d, items) = v.into_parts();
                let items = items
                    .into_iter()
                    .map(|e| elem.conform(e))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Val::from_storage(d, items))
            }
            (Type::Record { fields }, Val::Record(vals)) => {
                if fields.len() != vals.len() {
                    return Err(EvalError::TypeMismatch {
                        op: "assignment",
                        operands: "record shape".into(),
                    });
                }
                let mut out = Vec::with_capacity(vals.len());
                for ((fname, fty), (vname, v)) in fields.iter().zip(vals) {
                    if *fname != vname {
                        return Err(EvalError::TypeMismatch {
                            op: "assignment",
                            operands: format!("record field {vname} for {fname}"),
                        });
                    }
                    out.push((vname, fty.conform(v)?));
                }
                Ok(Val::Record(out))
            }
            (t, Val::Scalar(s)) if t.scalar_kind() == Some(s.kind()) => Ok(Val::Scalar(s)),
            (t, v) => Err(EvalError::TypeMismatch {
                op: "assignment",
                operands: format!("{} := {}", t, v.type_name()),
            }),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Bit => f.write_str("bit"),
            Type::Boolean => f.write_str("boolean"),
            Type::Character => f.write_str("character"),
            Type::Integer { lo, hi } if *lo == i64::MIN && *hi == i64::MAX => f.write_str("integer"),
            Type::Integer { lo, hi } => write!(f, "integer range {lo} to {hi}"),
            Type::Real => f.write_str("real"),
            Type::Time => f.write_str("time"),
            Type::Logic => f.write_str("std_logic"),
            Type::Vector { dir, range, elem } => match (range, dir) {
                (Some((lo, hi)), Dir::Downto) => write!(f, "array ({hi} downto {lo}) of {elem}"),
                (Some((lo, hi)), Dir::To) => write!(f, "array ({lo} to {hi}) of {elem}"),
                (None, _) => write!(f, "array (natural range <>) of {elem}"),
            },
            Type::Record { fields } => {
                f.write_str("record")?;
                for (n, t) in fields {
                    write!(f, " {n}: {t};")?;
                }
                f.write_str(" end record")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_leftmost() {
        assert_eq!(Type::natural().default_value(), Val::int(0));
        assert_eq!(Type::positive().default_value(), Val::int(1));
        assert_eq!(Type::logic_vec(3, 0).default_value().to_string(), "\"UUUU\"");
        let rec = Type::Record {
            fields: vec![("a".into(), Type::Bit), ("b".into(), Type::Boolean)],
        };
        assert_eq!(
            rec.default_value(),
            Val::Record(vec![("a".into(), Val::bit(false)), ("b".into(), Val::boolean(false))])
        );
    }

    #[test]
    fn conform_checks_ranges_and_lengths() {
        assert!(matches!(
            Type::natural().conform(Val::int(-1)),
            Err(EvalError::RangeViolation { value: -1, lo: 0, .. })
        ));
        assert_eq!(Type::integer().conform(Val::int(-1)), Ok(Val::int(-1)));
        let short = Val::logic_vec(Dir::Downto, "101");
        assert!(matches!(
            Type::logic_vec(3, 0).conform(short),
            Err(EvalError::LengthMismatch { left: 4, right: 3, .. })
        ));
        assert!(matches!(
            Type::Bit.conform(Val::int(0)),
            Err(EvalError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn conform_takes_the_declared_direction() {
        let t = Type::vector(Dir::To, 0, 2, Type::Logic);
        let v = t.conform(Val::logic_vec(Dir::Downto, "110")).unwrap();
        assert_eq!(v.to_string(), "\"110\"");
        assert_eq!(t.dir(), Some(Dir::To));
        assert_eq!(t.len(), Some(3));
    }

    #[test]
    fn record_fields_must_match_by_name() {
        let t = Type::Record {
            fields: vec![("a".into(), Type::Bit)],
        };
        assert!(t.conform(Val::Record(vec![("b".into(), Val::bit(true))])).is_err());
        assert!(t.conform(Val::Record(vec![("a".into(), Val::bit(true))])).is_ok());
    }
}
