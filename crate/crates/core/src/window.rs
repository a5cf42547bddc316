use crate::error::{OccupancyError, Result};
use crate::scalar::Real;

/// Fixed-capacity ring of the most recent values, newest last.
#[derive(Debug, Clone)]
pub(crate) struct Ring<T> {
    buf: Vec<T>,
    capacity: usize,
    // index of the oldest element once the buffer is full
    start: usize,
}

impl<T: Copy> Ring<T> {
    pub(crate) fn with_capacity(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            buf: Vec::with_capacity(capacity.min(1 << 16)),
            capacity,
            start: 0,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.buf.len()
    }

    pub(crate) fn capacity(&self) -> usize {
        self.capacity
    }

    pub(crate) fn push(&mut self, v: T) {
        if self.buf.len() < self.capacity {
            self.buf.push(v);
        } else {
            self.buf[self.start] = v;
            self.start += 1;
            if self.start == self.capacity {
                self.start = 0;
            }
        }
    }

    /// `back(0)` is the newest value, `back(k)` the one pushed `k` steps
    /// before it.
    #[inline]
    pub(crate) fn back(&self, k: usize) -> T {
        let len = self.buf.len();
        debug_assert!(k < len);
        if len < self.capacity {
            self.buf[len - 1 - k]
        } else {
            let newest = if self.start == 0 {
                len - 1
            } else {
                self.start - 1
            };
            let idx = if k <= newest {
                newest - k
            } else {
                len + newest - k
            };
            self.buf[idx]
        }
    }
}

/// The last `threshold + 1` normalized coefficients `q_{s-m}, ..., q_s`.
///
/// Every `q_s` is itself a probability, so each push is checked against the
/// unit interval and against the previous value (the sequence is
/// nonincreasing in `s`). A violation beyond [`Real::window_eps`] means the
/// floating-point evaluation has broken down.
#[derive(Debug, Clone)]
pub struct CoefficientWindow<T> {
    ring: Ring<T>,
    // index s of the newest entry; None before the first push
    current: Option<u64>,
}

impl<T: Real> CoefficientWindow<T> {
    pub fn new(threshold: u64) -> Self {
        let capacity = usize::try_from(threshold).expect("threshold fits in usize") + 1;
        Self {
            ring: Ring::with_capacity(capacity),
            current: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.ring.capacity()
    }

    /// Number of live entries, `min(s + 1, capacity)`.
    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.len() == 0
    }

    /// Index `s` of the newest coefficient.
    pub fn current_index(&self) -> Option<u64> {
        self.current
    }

    /// `q_{s-k}` where `s` is the current index.
    pub fn back(&self, k: usize) -> T {
        self.ring.back(k)
    }

    pub fn newest(&self) -> Option<T> {
        (!self.is_empty()).then(|| self.ring.back(0))
    }

    /// Appends `q_{s+1}`.
    pub fn push(&mut self, q: T) -> Result<()> {
        let step = self.current.map_or(0, |s| s + 1);
        let eps = T::window_eps();
        if !(q >= -eps && q <= T::one() + eps) {
            return Err(OccupancyError::NumericInstability {
                step,
                detail: format!("normalized coefficient {q:?} left the unit interval"),
            });
        }
        if let Some(prev) = self.newest() {
            if q > prev + eps {
                return Err(OccupancyError::NumericInstability {
                    step,
                    detail: format!("coefficient increased from {prev:?} to {q:?}"),
                });
            }
        }
        self.ring.push(q);
        self.current = Some(step);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_wraps() {
        let mut r = Ring::with_capacity(3);
        for v in 0..7 {
            r.push(v);
            let len = r.len();
            for k in 0..len {
                assert_eq!(r.back(k), v - k as i32);
            }
        }
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn window_live_entries() {
        let mut w = CoefficientWindow::<f64>::new(2);
        assert_eq!(w.capacity(), 3);
        assert!(w.is_empty());
        let values = [1.0, 1.0, 0.9, 0.5, 0.2, 0.0];
        for (s, &q) in values.iter().enumerate() {
            w.push(q).unwrap();
            assert_eq!(w.len(), (s + 1).min(3));
            assert_eq!(w.current_index(), Some(s as u64));
            assert_eq!(w.back(0), q);
        }
        assert_eq!(w.back(2), 0.5);
    }

    #[test]
    fn window_rejects_out_of_range() {
        let mut w = CoefficientWindow::<f64>::new(3);
        w.push(1.0).unwrap();
        assert!(w.push(1.0 + 1e-8).is_err());
        assert!(w.push(-1e-8).is_err());
        assert!(w.push(f64::NAN).is_err());
        w.push(1.0 + 5e-10).unwrap();
        w.push(-5e-10).unwrap();
    }

    #[test]
    fn window_rejects_increase() {
        let mut w = CoefficientWindow::<f64>::new(3);
        w.push(1.0).unwrap();
        w.push(0.5).unwrap();
        let err = w.push(0.6).unwrap_err();
        assert!(matches!(
            err,
            OccupancyError::NumericInstability { step: 2, .. }
        ));
    }
}
