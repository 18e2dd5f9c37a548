//! The mappings `F: Xⁿ → X` and `g: X → X`.

use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero at byte offset {offset}")]
    DivisionByZero { offset: usize },
    #[error("expected {expected} arguments, got {found}")]
    Arity { expected: usize, found: usize },
    #[error("argument {argument} has dimension {found}, expected {expected}")]
    Dimension {
        argument: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {0} is outside the finite carrier")]
    OutOfCarrier(usize),
    #[error("non-finite value produced")]
    NonFinite,
}

/// An n-ary mapping `F: Xⁿ → X`.
pub trait Mapping<P>: Send + Sync {
    fn arity(&self) -> usize;
    fn eval(&self, args: &[P]) -> Result<P, EvalError>;
}

/// A self-mapping `g: X → X`.
pub trait SelfMap<P>: Send + Sync {
    fn eval(&self, x: &P) -> Result<P, EvalError>;

    /// Whether this is known to be the identity. Solvers skip the inverse
    /// oracle when it is.
    fn is_identity(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Identity;

impl<P: Clone> SelfMap<P> for Identity {
    fn eval(&self, x: &P) -> Result<P, EvalError> {
        Ok(x.clone())
    }

    fn is_identity(&self) -> bool {
        true
    }
}

/// Wraps a closure as an n-ary mapping.
pub struct FnMapping<F> {
    arity: usize,
    f: F,
}

impl<F> FnMapping<F> {
    pub fn new<P>(arity: usize, f: F) -> Self
    where
        F: Fn(&[P]) -> P,
    {
        FnMapping { arity, f }
    }
}

impl<P, F> Mapping<P> for FnMapping<F>
where
    F: Fn(&[P]) -> P + Send + Sync,
{
    fn arity(&self) -> usize {
        self.arity
    }

    fn eval(&self, args: &[P]) -> Result<P, EvalError> {
        if args.len() != self.arity {
            return Err(EvalError::Arity {
                expected: self.arity,
                found: args.len(),
            });
        }
        Ok((self.f)(args))
    }
}

/// Wraps a closure as a self-mapping.
pub struct FnSelfMap<F>(pub F);

impl<P, F> SelfMap<P> for FnSelfMap<F>
where
    F: Fn(&P) -> P + Send + Sync,
{
    fn eval(&self, x: &P) -> Result<P, EvalError> {
        Ok((self.0)(x))
    }
}

/// `F` on a finite carrier `0..p`, tabulated over all `pⁿ` argument tuples.
///
/// Tuples are indexed in base `p` with the first argument most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTable {
    p: usize,
    n: usize,
    values: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("table for p = {p}, n = {n} needs {expected} entries, got {found}")]
    Size {
        p: usize,
        n: usize,
        expected: usize,
        found: usize,
    },
    #[error("value {value} at entry {entry} is outside 0..{p}")]
    Value { entry: usize, value: usize, p: usize },
    #[error("p^n overflows")]
    Overflow,
}

/// `pⁿ`, or `None` on overflow.
pub fn tuple_count(p: usize, n: usize) -> Option<usize> {
    p.checked_pow(u32::try_from(n).ok()?)
}

impl FiniteTable {
    pub fn new(p: usize, n: usize, values: Vec<usize>) -> Result<Self, TableError> {
        let expected = tuple_count(p, n).ok_or(TableError::Overflow)?;
        if values.len() != expected {
            return Err(TableError::Size {
                p,
                n,
                expected,
                found: values.len(),
            });
        }
        if let Some((entry, &value)) = values.iter().enumerate().find(|(_, &v)| v >= p) {
            return Err(TableError::Value { entry, value, p });
        }
        Ok(FiniteTable { p, n, values })
    }

    /// Tabulates any mapping over the carrier `0..p`.
    pub fn tabulate(p: usize, n: usize, mut f: impl FnMut(&[usize]) -> usize) -> Result<Self, TableError> {
        let count = tuple_count(p, n).ok_or(TableError::Overflow)?;
        let mut args = alloc::vec![0; n];
        let values = (0..count)
            .map(|idx| {
                decode_tuple(idx, p, &mut args);
                f(&args)
            })
            .collect();
        Self::new(p, n, values)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, args: &[usize]) -> Option<usize> {
        if args.len() != self.n {
            return None;
        }
        let mut idx = 0usize;
        for &a in args {
            if a >= self.p {
                return None;
            }
            idx = idx * self.p + a;
        }
        Some(self.values[idx])
    }
}

/// Writes the base-`p` digits of `idx` into `out` (most significant first).
pub fn decode_tuple(mut idx: usize, p: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = idx % p;
        idx /= p;
    }
}

impl Mapping<usize> for FiniteTable {
    fn arity(&self) -> usize {
        self.n
    }

    fn eval(&self, args: &[usize]) -> Result<usize, EvalError> {
        if args.len() != self.n {
            return Err(EvalError::Arity {
                expected: self.n,
                found: args.len(),
            });
        }
        if let Some(&bad) = args.iter().find(|&&a| a >= self.p) {
            return Err(EvalError::OutOfCarrier(bad));
        }
        Ok(self.get(args).expect("arguments checked"))
    }
}

/// `g` on a finite carrier `0..p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnaryTable {
    values: Vec<usize>,
}

impl UnaryTable {
    pub fn new(values: Vec<usize>) -> Result<Self, TableError> {
        let p = values.len();
        if let Some((entry, &value)) = values.iter().enumerate().find(|(_, &v)| v >= p) {
            return Err(TableError::Value { entry, value, p });
        }
        Ok(UnaryTable { values })
    }

    pub fn identity(p: usize) -> Self {
        UnaryTable {
            values: (0..p).collect(),
        }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

impl SelfMap<usize> for UnaryTable {
    fn eval(&self, x: &usize) -> Result<usize, EvalError> {
        self.values.get(*x).copied().ok_or(EvalError::OutOfCarrier(*x))
    }

    fn is_identity(&self) -> bool {
        self.values.iter().enumerate().all(|(i, &v)| i == v)
    }
}

impl<P, M: Mapping<P> + ?Sized> Mapping<P> for &M {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn eval(&self, args: &[P]) -> Result<P, EvalError> {
        (**self).eval(args)
    }
}

impl<P, M: SelfMap<P> + ?Sized> SelfMap<P> for &M {
    fn eval(&self, x: &P) -> Result<P, EvalError> {
        (**self).eval(x)
    }

    fn is_identity(&self) -> bool {
        (**self).is_identity()
    }
}

impl<P, M: Mapping<P> + ?Sized> Mapping<P> for alloc::boxed::Box<M> {
    fn arity(&self) -> usize {
        (**self).arity()
    }

    fn eval(&self, args: &[P]) -> Result<P, EvalError> {
        (**self).eval(args)
    }
}

impl<P, M: SelfMap<P> + ?Sized> SelfMap<P> for alloc::boxed::Box<M> {
    fn eval(&self, x: &P) -> Result<P, EvalError> {
        (**self).eval(x)
    }

    fn is_identity(&self) -> bool {
        (**self).is_identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn table_indexing_is_base_p() {
        let min = FiniteTable::tabulate(3, 2, |a| a[0].min(a[1])).unwrap();
        assert_eq!(min.eval(&[2, 1]).unwrap(), 1);
        assert_eq!(min.values()[2 * 3 + 1], 1);
        assert_eq!(min.eval(&[3, 1]), Err(EvalError::OutOfCarrier(3)));
        assert_eq!(min.eval(&[1]), Err(EvalError::Arity { expected: 2, found: 1 }));
    }

    #[test]
    fn table_validation() {
        assert!(matches!(
            FiniteTable::new(2, 2, vec![0, 1, 1]),
            Err(TableError::Size {
                expected: 4,
                found: 3,
                ..
            })
        ));
        assert!(matches!(
            FiniteTable::new(2, 1, vec![0, 2]),
            Err(TableError::Value { entry: 1, value: 2, .. })
        ));
        assert!(UnaryTable::new(vec![1, 2]).is_err());
        assert!(UnaryTable::identity(4).is_identity());
        assert!(!UnaryTable::new(vec![1, 0]).unwrap().is_identity());
        assert_eq!(tuple_count(10, 7), Some(10_000_000));
        assert_eq!(tuple_count(usize::MAX, 2), None);
    }

    #[test]
    fn closure_wrappers() {
        let f = FnMapping::new(2, |a: &[f64]| a[0] + a[1]);
        assert_eq!(f.eval(&[1.0, 2.0]).unwrap(), 3.0);
        assert!(f.eval(&[1.0]).is_err());
        let g = FnSelfMap(|x: &f64| 2.0 * x);
        assert_eq!(g.eval(&4.0).unwrap(), 8.0);
        assert!(!g.is_identity());
        assert!(SelfMap::<f64>::is_identity(&Identity));
    }
}
