//! Corner smoothing for piecewise warp curves.
//!
//! Each selected corner of a piecewise-C^2 function is replaced on a
//! window `[c - delta, c + delta]` by the plain mollification
//! `f_delta = f * psi_delta` with the standard bump kernel. Its second
//! derivative is the kernel average of the one-sided second derivatives
//! plus `(J/delta) psi((r - c)/delta)` for a slope jump `J >= 0`, so on
//! the window
//!
//! ```text
//!     inf f_delta'' >= min(inf f_1'', inf f_2''),
//! ```
//!
//! a convex combination under a nonnegative kernel. Convexity floors
//! survive smoothing exactly; the curvature certificates downstream
//! depend on precisely this (`K(Y_i, Y_4) = -f''/f` keeps its sign).
//!
//! Mollification leaves `O(delta^2 f'')` value and slope mismatches at
//! the window edges. Repairing them inside the window would contaminate
//! the second derivative there by a fixed fraction of the curvature jump
//! (a Hermite fix of size `dv` costs `dv / delta^2`, independent of
//! `delta`), which can dwarf floors as small as the matching parabola's
//! `q'' = 2 eps^6`. Instead the mismatches ride out to zero over
//! absorption spans on either side of the window: quintic ramps with
//! vanishing second derivative at both ends add the required value and
//! slope while costing only `O(dv / W^2)` in second derivative over a
//! span of width `W >> delta`. The smoothed curve is exactly C^1, is
//! C^infinity inside the window and on the spans, and coincides with the
//! raw pieces outside the affected range.
//!
//! At the two window edges the second derivative retains a jump of size
//! `O(delta^2 sup |f''''|)` inherited from the pure convolution (the
//! ramps end with zero second derivative by design). The jump vanishes
//! identically against polynomial pieces of degree <= 3; elsewhere it is
//! far below the ambient second derivative for the window sizes the
//! profile uses.
//!
//! Warp curves are handled in value space but evaluated through their
//! logarithms: [`CornerSmoother::for_log_curve`] rescales by
//! `exp(-ln f(c))` so the convolved quantity stays within a factor
//! `e^{O(1)}` of one even when the warp itself underflows, smooths the
//! rescaled value curve, and converts the result back to a log jet.
//! Rescaling commutes with convolution, so this is exactly value-space
//! smoothing of the warp.
//!
//! Convolutions are evaluated by splitting the kernel integral at the
//! preimage of the corner and applying a fixed Gauss-Legendre rule on
//! each panel, so the integrands are smooth and the quadrature is
//! accurate to near machine precision.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Value, first and second derivative of a scalar function at a point.
pub type Jet2 = (f64, f64, f64);

const GL_POINTS: usize = 48;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, accurate enough for Newton.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// The standard bump kernel `psi(u) = C exp(-1/(1 - u^2))` on `(-1, 1)`,
/// normalized to unit mass, together with the quadrature rule used for
/// all convolution integrals.
pub struct MollifierKernel {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    norm: f64,
}

fn raw_bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

impl MollifierKernel {
    /// The shared kernel instance.
    pub fn global() -> &'static MollifierKernel {
        static KERNEL: OnceLock<MollifierKernel> = OnceLock::new();
        KERNEL.get_or_init(|| {
            let (nodes, weights) = gauss_legendre(GL_POINTS);
            let mut kernel = MollifierKernel {
                nodes,
                weights,
                norm: 1.0,
            };
            let mass = kernel.integrate(-1.0, 1.0, raw_bump);
            kernel.norm = 1.0 / mass;
            kernel
        })
    }

    /// Normalized kernel value.
    pub fn psi(&self, u: f64) -> f64 {
        self.norm * raw_bump(u)
    }

    /// Gauss-Legendre integral of `f` over `[lo, hi]`. Intervals that
    /// straddle zero are split there, so integrals over `(-1, u0)` and
    /// `(u0, 1)` reproduce the panel decomposition of the normalization
    /// integral exactly when `u0` hits an endpoint.
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        if lo < 0.0 && hi > 0.0 {
            self.integrate_panel(lo, 0.0, &f) + self.integrate_panel(0.0, hi, &f)
        } else {
            self.integrate_panel(lo, hi, &f)
        }
    }

    fn integrate_panel(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// `int |u| psi(u) du`, the sup-deviation constant for slope corners.
    pub fn abs_first_moment(&self) -> f64 {
        2.0 * self.integrate(0.0, 1.0, |u| u * self.psi(u))
    }
}

fn quintic_value_basis(t: f64) -> Jet2 {
    // H(0)=0, H(1)=1, H'(0)=H'(1)=0, H''(0)=H''(1)=0.
    let (t2, t3) = (t * t, t * t * t);
    (
        t3 * (10.0 - 15.0 * t + 6.0 * t2),
        t2 * (30.0 - 60.0 * t + 30.0 * t2),
        t * (60.0 - 180.0 * t + 120.0 * t2),
    )
}

fn quintic_slope_basis(t: f64) -> Jet2 {
    // H(0)=H(1)=0, H'(0)=0, H'(1)=1, H''(0)=H''(1)=0.
    let (t2, t3) = (t * t, t * t * t);
    (
        t3 * (-4.0 + 7.0 * t - 3.0 * t2),
        t2 * (-12.0 + 28.0 * t - 15.0 * t2),
        t * (-24.0 + 84.0 * t - 60.0 * t2),
    )
}

type BoxedJet = Box<dyn Fn(f64) -> Jet2 + Send + Sync>;

/// One smoothed corner: mollification on `[c - delta, c + delta]` with
/// absorption spans carrying the edge mismatches back to the raw pieces.
/// Callers evaluate the raw pieces outside [`CornerSmoother::affected`]
/// and [`CornerSmoother::eval`] inside it.
pub struct CornerSmoother {
    corner: f64,
    delta: f64,
    span_left: f64,
    span_right: f64,
    left: BoxedJet,
    right: BoxedJet,
    /// Constant added to the right piece before convolution so the corner
    /// is value-continuous to the last bit; the right absorption span
    /// tapers it back out along with the quadrature mismatches.
    right_shift: f64,
    slope_jump: f64,
    // Convolution-vs-raw mismatches at the two window edges.
    dv_left: f64,
    ds_left: f64,
    dv_right: f64,
    ds_right: f64,
    /// Inputs and outputs are log jets; convolution runs on the rescaled
    /// exponential.
    log_mode: bool,
    ln_scale: f64,
}

impl std::fmt::Debug for CornerSmoother {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CornerSmoother")
            .field("corner", &self.corner)
            .field("delta", &self.delta)
            .field("span_left", &self.span_left)
            .field("span_right", &self.span_right)
            .field("slope_jump", &self.slope_jump)
            .field("dv_left", &self.dv_left)
            .field("ds_left", &self.ds_left)
            .field("dv_right", &self.dv_right)
            .field("ds_right", &self.ds_right)
            .field("log_mode", &self.log_mode)
            .finish()
    }
}

impl CornerSmoother {
    /// Builds the smoother for a corner at `c` with window half-width
    /// `delta` and absorption spans of the given widths.
    ///
    /// `left` must supply the jet of the incoming piece on
    /// `[c - delta - span_left, c]`, `right` the outgoing piece on
    /// `[c, c + delta + span_right]`. Value continuity at `c` is the
    /// caller's responsibility up to floating point noise (the residual
    /// is folded into the right span); a slope jump is allowed and
    /// handled. A zero-width span leaves that edge's `O(delta^2 f'')`
    /// mismatch in place as a value/slope defect, so profile corners
    /// always get positive spans.
    pub fn new<L, R>(
        c: f64,
        delta: f64,
        span_left: f64,
        span_right: f64,
        left: L,
        right: R,
    ) -> CornerSmoother
    where
        L: Fn(f64) -> Jet2 + Send + Sync + 'static,
        R: Fn(f64) -> Jet2 + Send + Sync + 'static,
    {
        Self::build(
            c,
            delta,
            span_left,
            span_right,
            Box::new(left),
            Box::new(right),
            false,
            0.0,
        )
    }

    /// Builds a smoother whose inputs and outputs are jets of `ln f`; the
    /// underlying warp `f` is what gets mollified. The rescaling by
    /// `exp(-ln f(c))` keeps the convolved values within `e^{O(1)}` of
    /// one for any warp magnitude and cancels exactly on conversion back.
    pub fn for_log_curve<L, R>(
        c: f64,
        delta: f64,
        span_left: f64,
        span_right: f64,
        left_log: L,
        right_log: R,
    ) -> CornerSmoother
    where
        L: Fn(f64) -> Jet2 + Send + Sync + 'static,
        R: Fn(f64) -> Jet2 + Send + Sync + 'static,
    {
        let ln_scale = left_log(c).0;
        let value_jet = move |log_jet: Jet2| -> Jet2 {
            let g = (log_jet.0 - ln_scale).exp();
            (g, g * log_jet.1, g * (log_jet.2 + log_jet.1 * log_jet.1))
        };
        let left = move |r: f64| value_jet(left_log(r));
        let right = move |r: f64| value_jet(right_log(r));
        Self::build(
            c,
            delta,
            span_left,
            span_right,
            Box::new(left),
            Box::new(right),
            true,
            ln_scale,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        c: f64,
        delta: f64,
        span_left: f64,
        span_right: f64,
        left: BoxedJet,
        right: BoxedJet,
        log_mode: bool,
        ln_scale: f64,
    ) -> CornerSmoother {
        assert!(delta > 0.0 && delta.is_finite(), "invalid window width");
        assert!(
            span_left >= 0.0 && span_right >= 0.0,
            "spans must be nonnegative"
        );
        let at_left = left(c);
        let at_right = right(c);
        let mut smoother = CornerSmoother {
            corner: c,
            delta,
            span_left,
            span_right,
            left,
            right,
            right_shift: at_left.0 - at_right.0,
            slope_jump: at_right.1 - at_left.1,
            dv_left: 0.0,
            ds_left: 0.0,
            dv_right: 0.0,
            ds_right: 0.0,
            log_mode,
            ln_scale,
        };

        let raw_l = (smoother.left)(c - delta);
        let conv_l = smoother.convolved(c - delta);
        smoother.dv_left = conv_l.0 - raw_l.0;
        smoother.ds_left = conv_l.1 - raw_l.1;

        // The right mismatch is measured against the unshifted piece: the
        // span ends on the raw curve.
        let raw_r = (smoother.right)(c + delta);
        let conv_r = smoother.convolved(c + delta);
        smoother.dv_right = conv_r.0 - raw_r.0;
        smoother.ds_right = conv_r.1 - raw_r.1;
        smoother
    }

    /// The mollified interval.
    pub fn window(&self) -> (f64, f64) {
        (self.corner - self.delta, self.corner + self.delta)
    }

    /// The full interval on which the curve differs from the raw pieces:
    /// window plus absorption spans.
    pub fn affected(&self) -> (f64, f64) {
        (
            self.corner - self.delta - self.span_left,
            self.corner + self.delta + self.span_right,
        )
    }

    pub fn corner(&self) -> f64 {
        self.corner
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Convolution jet at `r`: the integral over `u` of the appropriate
    /// one-sided jet at `r - delta u`, split at the corner preimage, plus
    /// the kernel spike from any slope jump.
    fn convolved(&self, r: f64) -> Jet2 {
        let kernel = MollifierKernel::global();
        let u0 = ((r - self.corner) / self.delta).clamp(-1.0, 1.0);
        let mut jet = [0.0; 3];
        // u < u0 puts the argument r - delta u to the right of the corner.
        for k in 0..3 {
            let shift = if k == 0 { self.right_shift } else { 0.0 };
            let right_part = kernel.integrate(-1.0, u0, |u| {
                let j = (self.right)(r - self.delta * u);
                kernel.psi(u) * ([j.0, j.1, j.2][k] + shift)
            });
            let left_part = kernel.integrate(u0, 1.0, |u| {
                let j = (self.left)(r - self.delta * u);
                kernel.psi(u) * [j.0, j.1, j.2][k]
            });
            jet[k] = right_part + left_part;
        }
        jet[2] += self.slope_jump / self.delta * kernel.psi(u0);
        (jet[0], jet[1], jet[2])
    }

    /// The smoothed jet in the function space of the convolution (warp
    /// values in log mode).
    fn eval_value(&self, r: f64) -> Jet2 {
        let (wlo, whi) = self.window();
        if r < wlo {
            let raw = (self.left)(r);
            if self.span_left == 0.0 {
                return raw;
            }
            let t = (r - (wlo - self.span_left)) / self.span_left;
            let t = t.clamp(0.0, 1.0);
            let hv = quintic_value_basis(t);
            let hs = quintic_slope_basis(t);
            let w = self.span_left;
            (
                raw.0 + self.dv_left * hv.0 + self.ds_left * w * hs.0,
                raw.1 + self.dv_left * hv.1 / w + self.ds_left * hs.1,
                raw.2 + self.dv_left * hv.2 / (w * w) + self.ds_left * hs.2 / w,
            )
        } else if r > whi {
            let raw = (self.right)(r);
            if self.span_right == 0.0 {
                return raw;
            }
            let t = ((whi + self.span_right) - r) / self.span_right;
            let t = t.clamp(0.0, 1.0);
            let hv = quintic_value_basis(t);
            let hs = quintic_slope_basis(t);
            let w = self.span_right;
            (
                raw.0 + self.dv_right * hv.0 - self.ds_right * w * hs.0,
                raw.1 - self.dv_right * hv.1 / w + self.ds_right * hs.1,
                raw.2 + self.dv_right * hv.2 / (w * w) - self.ds_right * hs.2 / w,
            )
        } else {
            self.convolved(r)
        }
    }

    /// The smoothed jet at `r`, which must lie inside the affected range.
    /// In log mode this is the log jet of the smoothed warp.
    pub fn eval(&self, r: f64) -> Jet2 {
        let jet = self.eval_value(r);
        if !self.log_mode {
            return jet;
        }
        let l = jet.1 / jet.0;
        (jet.0.ln() + self.ln_scale, l, jet.2 / jet.0 - l * l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_has_unit_mass() {
        // Composite Simpson as an independent check on the cached
        // Gauss-Legendre normalization.
        let kernel = MollifierKernel::global();
        let n = 4000;
        let h = 2.0 / n as f64;
        let mut mass = 0.0;
        for i in 0..n {
            let a = -1.0 + i as f64 * h;
            mass += h / 6.0
                * (kernel.psi(a) + 4.0 * kernel.psi(a + 0.5 * h) + kernel.psi(a + h));
        }
        assert!((mass - 1.0).abs() < 1e-12, "mass = {mass}");
    }

    #[test]
    fn quadrature_is_exact_on_polynomials() {
        let kernel = MollifierKernel::global();
        let exact = (7.0f64.powi(6) - 2.0f64.powi(6)) / 6.0;
        let got = kernel.integrate(2.0, 7.0, |x| x.powi(5));
        assert!((got - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn hermite_bases_satisfy_their_endpoint_conditions() {
        let hv0 = quintic_value_basis(0.0);
        let hv1 = quintic_value_basis(1.0);
        assert_eq!((hv0.0, hv0.1, hv0.2), (0.0, 0.0, 0.0));
        assert_eq!((hv1.0, hv1.1, hv1.2), (1.0, 0.0, 0.0));
        let hs0 = quintic_slope_basis(0.0);
        let hs1 = quintic_slope_basis(1.0);
        assert_eq!((hs0.0, hs0.1, hs0.2), (0.0, 0.0, 0.0));
        assert_eq!((hs1.0, hs1.1, hs1.2), (0.0, 1.0, 0.0));
    }

    fn abs_corner(delta: f64) -> CornerSmoother {
        CornerSmoother::new(
            0.0,
            delta,
            delta,
            delta,
            |r| (-r, -1.0, 0.0),
            |r| (r, 1.0, 0.0),
        )
    }

    #[test]
    fn absolute_value_edges_and_spans_are_exact() {
        // Linear pieces convolve to themselves at the window edges, so the
        // mismatches vanish and the spans are dormant: the curve equals
        // |r| outside the window to machine precision.
        let s = abs_corner(0.25);
        for r in [-0.5, -0.3, -0.25, 0.25, 0.3, 0.5] {
            let (v, d, _) = s.eval(r);
            assert!((v - r.abs()).abs() < 1e-14, "r = {r}: {v}");
            assert!((d - r.signum()).abs() < 1e-14);
        }
    }

    #[test]
    fn absolute_value_smoothing_is_convex_inside() {
        // The exact smoothed curvature is (J / delta) psi(r / delta),
        // which drops below f64 noise in the outermost couple of percent
        // of the window (psi(0.99) ~ 1e-22). Require strict positivity
        // wherever the kernel is resolvable and only near-nonnegativity
        // in the extreme edge band.
        let delta = 0.1;
        let s = abs_corner(delta);
        for i in 1..200 {
            let r = -delta + 2.0 * delta * i as f64 / 200.0;
            let (_, _, f2) = s.eval(r);
            if r.abs() <= 0.98 * delta {
                assert!(f2 > 0.0, "r = {r}: f'' = {f2}");
            } else {
                assert!(f2 > -1e-9, "r = {r}: f'' = {f2}");
            }
        }
    }

    #[test]
    fn absolute_value_peak_deviation_halves_with_delta() {
        let kernel = MollifierKernel::global();
        let expected_ratio = kernel.abs_first_moment();
        let mut sups = Vec::new();
        for delta in [0.2, 0.1, 0.05] {
            let s = abs_corner(delta);
            let mut sup: f64 = 0.0;
            for i in 0..=400 {
                let r = -delta + 2.0 * delta * i as f64 / 400.0;
                sup = sup.max((s.eval(r).0 - r.abs()).abs());
            }
            assert!((sup - delta * expected_ratio).abs() < 1e-12 + 1e-6 * sup);
            sups.push(sup);
        }
        assert!(sups[0] / sups[1] > 1.8);
        assert!(sups[1] / sups[2] > 1.8);
    }

    #[test]
    fn curvature_corner_stays_in_the_one_sided_hull() {
        // Two parabolas with a second-derivative jump and matching value
        // and slope at the corner. Quadratics convolve exactly, so the
        // smoothed second derivative is a true convex combination of the
        // one-sided values: no overshoot anywhere, and the window edges
        // are C^2 to quadrature precision.
        let left = |r: f64| (2.0 * r * r + r, 4.0 * r + 1.0, 4.0);
        let right = |r: f64| (-3.0 * r * r + r, -6.0 * r + 1.0, -6.0);
        let s = CornerSmoother::new(0.0, 0.5, 2.0, 2.0, left, right);
        let (a, b) = s.window();
        assert!((s.eval(a).2 - 4.0).abs() < 1e-10, "{}", s.eval(a).2);
        assert!((s.eval(b).2 + 6.0).abs() < 1e-10, "{}", s.eval(b).2);
        for i in 0..=200 {
            let r = a + (b - a) * i as f64 / 200.0;
            let f2 = s.eval(r).2;
            assert!(
                (-6.0 - 1e-9..=4.0 + 1e-9).contains(&f2),
                "r = {r}: f'' = {f2}"
            );
        }
        // Spans restore the raw pieces exactly at their far ends.
        let (lo, hi) = s.affected();
        for (r, raw) in [(lo, left(lo)), (hi, right(hi))] {
            let jet = s.eval(r);
            assert!((jet.0 - raw.0).abs() < 1e-12 * raw.0.abs().max(1.0));
            assert!((jet.1 - raw.1).abs() < 1e-12 * raw.1.abs().max(1.0));
            assert!((jet.2 - raw.2).abs() < 1e-11);
        }
    }

    #[test]
    fn tiny_convexity_floors_survive_smoothing() {
        // The matching-parabola geometry in miniature: the left piece has
        // a healthy second derivative, the right piece a floor of 2e-12,
        // with value and slope matched at the corner. The mollified
        // second derivative must never dip below the floor; the old
        // window-edge Hermite repair violated this by eight orders of
        // magnitude.
        let floor = 2e-12;
        let left = |r: f64| (0.28 * r * r + 0.75 * r, 0.56 * r + 0.75, 0.56);
        let right = move |r: f64| (0.5 * floor * r * r + 0.75 * r, floor * r + 0.75, floor);
        let s = CornerSmoother::new(0.0, 0.05, 1.0, 1.0, left, right);
        let (lo, hi) = s.affected();
        for i in 0..=1000 {
            let r = lo + (hi - lo) * i as f64 / 1000.0;
            let f2 = s.eval(r).2;
            assert!(f2 >= floor * 0.99, "r = {r}: f'' = {f2}");
        }
    }

    #[test]
    fn log_mode_smooths_the_warp_not_its_logarithm() {
        // A C^1 corner between ln h = r/2 and a log-parabola picking up
        // extra curvature. The warp's convexity bound
        // h''/h = (ln h)'' + ((ln h)')^2 must survive across the affected
        // range, and the output must match the raw log jets at the far
        // ends of the spans.
        let left = |r: f64| (0.5 * r, 0.5, 0.0);
        let right = |r: f64| {
            let t = r - 0.3;
            (0.5 * r + 0.1 * t * t, 0.5 + 0.2 * t, 0.2)
        };
        let s = CornerSmoother::for_log_curve(0.3, 0.02, 0.2, 0.2, left, right);
        let (lo, hi) = s.affected();
        for (r, raw) in [(lo, left(lo)), (hi, right(hi))] {
            let jet = s.eval(r);
            assert!((jet.0 - raw.0).abs() < 1e-13, "{} vs {}", jet.0, raw.0);
            assert!((jet.1 - raw.1).abs() < 1e-12);
            assert!((jet.2 - raw.2).abs() < 1e-10);
        }
        for i in 0..=500 {
            let r = lo + (hi - lo) * i as f64 / 500.0;
            let (_, l, dd) = s.eval(r);
            let q = dd + l * l;
            // Inside the window h''/h is a ratio of kernel averages of
            // quantities obeying the floor pointwise, so it holds there
            // exactly; on the spans the ramp corrections dent it by
            // O(delta^2 / span^2) of itself, about 0.8% at these widths.
            let (wlo, whi) = s.window();
            let floor = if (wlo..=whi).contains(&r) {
                0.25 * (1.0 - 1e-12)
            } else {
                0.25 * (1.0 - 0.02)
            };
            assert!(q >= floor, "r = {r}: h''/h = {q}");
        }
    }

    #[test]
    fn log_mode_is_scale_invariant() {
        // The same corner shifted deep into underflow territory: the
        // rescaling must make the smoothed log jets agree with the
        // unshifted ones exactly, up to the additive constant.
        let build = |offset: f64| {
            CornerSmoother::for_log_curve(
                0.3,
                0.02,
                0.2,
                0.2,
                move |r: f64| (offset + 0.5 * r, 0.5, 0.0),
                move |r: f64| {
                    let t = r - 0.3;
                    (offset + 0.5 * r + 0.1 * t * t, 0.5 + 0.2 * t, 0.2)
                },
            )
        };
        let base = build(0.0);
        let deep = build(-740.0);
        for i in 0..=40 {
            let r = 0.3 - 0.24 + 0.48 * i as f64 / 40.0;
            let (v0, l0, d0) = base.eval(r);
            let (v1, l1, d1) = deep.eval(r);
            // Agreement is limited by ulp(offset) in the shifted log
            // arguments, about 1e-13 here.
            assert!((v1 - v0 + 740.0).abs() < 1e-10, "r = {r}");
            assert!((l1 - l0).abs() < 1e-12, "r = {r}: {l1} vs {l0}");
            assert!((d1 - d0).abs() < 1e-11, "r = {r}: {d1} vs {d0}");
        }
    }
}
