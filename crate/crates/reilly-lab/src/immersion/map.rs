use std::sync::Arc;

use super::jet::{Jet, Real};
use crate::error::Result;

/// A smooth map between coordinate spaces, evaluated on plain numbers and,
/// when closed-form, on second-order jets.
pub trait AmbientMap: Send + Sync {
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>>;

    /// Jet evaluation; `None` means only finite differences are available.
    fn eval_jet(&self, _y: &[Jet]) -> Option<Result<Vec<Jet>>> {
        None
    }
}

/// Closed-form map written once over [`Real`].
pub trait GenericMap: Send + Sync {
    fn apply<R: Real>(&self, y: &[R]) -> Result<Vec<R>>;
}

/// Adapter exposing a [`GenericMap`] with exact jet derivatives.
pub struct Analytic<M>(pub M);

impl<M: GenericMap> AmbientMap for Analytic<M> {
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.0.apply(y)
    }

    fn eval_jet(&self, y: &[Jet]) -> Option<Result<Vec<Jet>>> {
        Some(self.0.apply(y))
    }
}

/// Adapter for an arbitrary closure; derivatives by finite differences.
pub struct FnMap<F>(pub F);

impl<F> AmbientMap for FnMap<F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync,
{
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        (self.0)(y)
    }
}

/// Composition `outer ∘ inner`; jets propagate when both sides support them.
pub struct Composed {
    pub inner: Arc<dyn AmbientMap>,
    pub outer: Arc<dyn AmbientMap>,
}

impl AmbientMap for Composed {
    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.outer.eval(&self.inner.eval(y)?)
    }

    fn eval_jet(&self, y: &[Jet]) -> Option<Result<Vec<Jet>>> {
        let inner = match self.inner.eval_jet(y)? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        self.outer.eval_jet(&inner)
    }
}

/// The identity map, useful as a neutral pushforward.
pub struct Identity;

impl GenericMap for Identity {
    fn apply<R: Real>(&self, y: &[R]) -> Result<Vec<R>> {
        Ok(y.to_vec())
    }
}
