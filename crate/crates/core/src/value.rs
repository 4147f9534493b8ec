//! Primitive values and the built-in operations over them.

use std::fmt;

use crate::error::PrimitiveError;
use crate::schema::SortId;

/// A primitive value carried by a literal e-node.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    I64(i64),
    Str(String),
    Bool(bool),
    Unit,
}

impl Value {
    pub fn sort(&self) -> SortId {
        match self {
            Value::I64(_) => SortId::I64,
            Value::Str(_) => SortId::STRING,
            Value::Bool(_) => SortId::BOOL,
            Value::Unit => SortId::UNIT,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::I64(v) => Some(*v),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::I64(v) => serde_json::Value::from(*v),
            Value::Str(s) => serde_json::Value::from(s.as_str()),
            Value::Bool(b) => serde_json::Value::from(*b),
            Value::Unit => serde_json::Value::Null,
        }
    }

    /// Inverse of [`Value::to_json`], given the sort the value must have.
    pub fn from_json(sort: SortId, json: &serde_json::Value) -> Option<Value> {
        match (sort, json) {
            (SortId::I64, serde_json::Value::Number(n)) => n.as_i64().map(Value::I64),
            (SortId::STRING, serde_json::Value::String(s)) => Some(Value::Str(s.clone())),
            (SortId::BOOL, serde_json::Value::Bool(b)) => Some(Value::Bool(*b)),
            (SortId::UNIT, serde_json::Value::Null) => Some(Value::Unit),
            _ => None,
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::I64(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_owned())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::I64(v) => write!(f, "{v}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
            Value::Bool(b) => write!(f, "{b}"),
            Value::Unit => f.write_str("()"),
        }
    }
}

/// Built-in primitive operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimitiveOp {
    Add,
    Sub,
    Mul,
    Min,
    Max,
    Eq,
    Ne,
}

impl PrimitiveOp {
    pub const ALL: [PrimitiveOp; 7] = [
        PrimitiveOp::Add,
        PrimitiveOp::Sub,
        PrimitiveOp::Mul,
        PrimitiveOp::Min,
        PrimitiveOp::Max,
        PrimitiveOp::Eq,
        PrimitiveOp::Ne,
    ];

    pub fn from_name(name: &str) -> Option<PrimitiveOp> {
        Self::ALL.into_iter().find(|op| op.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveOp::Add => "+",
            PrimitiveOp::Sub => "-",
            PrimitiveOp::Mul => "*",
            PrimitiveOp::Min => "min",
            PrimitiveOp::Max => "max",
            PrimitiveOp::Eq => "=",
            PrimitiveOp::Ne => "!=",
        }
    }

    fn is_comparison(self) -> bool {
        matches!(self, PrimitiveOp::Eq | PrimitiveOp::Ne)
    }

    /// Result sort of the operation applied to arguments of the given sorts.
    pub fn result_sort(self, args: &[SortId]) -> Result<SortId, PrimitiveError> {
        if args.len() != 2 {
            return Err(PrimitiveError::ArityMismatch {
                op: self.name().to_owned(),
                expected: 2,
                found: args.len(),
            });
        }
        if self.is_comparison() {
            if args[0] != args[1] || !args[0].is_primitive() {
                return Err(PrimitiveError::TypeMismatch {
                    op: self.name().to_owned(),
                });
            }
            Ok(SortId::BOOL)
        } else if args.iter().all(|s| *s == SortId::I64) {
            Ok(SortId::I64)
        } else {
            Err(PrimitiveError::TypeMismatch {
                op: self.name().to_owned(),
            })
        }
    }

    pub fn eval(self, args: &[Value]) -> Result<Value, PrimitiveError> {
        if args.len() != 2 {
            return Err(PrimitiveError::ArityMismatch {
                op: self.name().to_owned(),
                expected: 2,
                found: args.len(),
            });
        }
        let (a, b) = (&args[0], &args[1]);
        if self.is_comparison() {
            if a.sort() != b.sort() {
                return Err(PrimitiveError::TypeMismatch {
                    op: self.name().to_owned(),
                });
            }
            let eq = a == b;
            return Ok(Value::Bool(if self == PrimitiveOp::Eq { eq } else { !eq }));
        }
        let (Some(x), Some(y)) = (a.as_i64(), b.as_i64()) else {
            return Err(PrimitiveError::TypeMismatch {
                op: self.name().to_owned(),
            });
        };
        let result = match self {
            PrimitiveOp::Add => x.checked_add(y),
            PrimitiveOp::Sub => x.checked_sub(y),
            PrimitiveOp::Mul => x.checked_mul(y),
            PrimitiveOp::Min => Some(x.min(y)),
            PrimitiveOp::Max => Some(x.max(y)),
            PrimitiveOp::Eq | PrimitiveOp::Ne => unreachable!(),
        };
        result
            .map(Value::I64)
            .ok_or_else(|| PrimitiveError::Overflow {
                op: self.name().to_owned(),
                lhs: x,
                rhs: y,
            })
    }
}

impl fmt::Display for PrimitiveOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates the primitive named `op_name` on `args`.
pub fn eval_primitive(op_name: &str, args: &[Value]) -> Result<Value, PrimitiveError> {
    PrimitiveOp::from_name(op_name)
        .ok_or_else(|| PrimitiveError::UnknownPrimitive(op_name.to_owned()))?
        .eval(args)
}
