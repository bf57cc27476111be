//! The warp schedule: a piecewise definition of the three warp functions
//! `(v, h_theta, h_r)` that interpolates between an epsilon-thin
//! horospherical product metric deep inside the removed hyperplane's
//! collar and the model metric far outside it.
//!
//! All pieces are built and evaluated in log space: a piece reports
//! `(ln f, (ln f)', (ln f)'')` and never materializes `f` itself, so the
//! schedule stays meaningful at radii where the raw warps under- or
//! overflow. Corners between pieces are mollified in value space (see
//! [`smoothing`]), which preserves each warp's convexity floor exactly;
//! the smoothers rescale internally so this works at any radius too.
//! Radial positions are laid out by [`RegionSchedule`]:
//!
//! ```text
//!   region 1   r < a        v = eps e^r          h = e^{r/2}
//!   region 2   a <= r < b   v = eps e^r          h: bridge, then parabola
//!   region 3   b <= r < c   v = eps e^r          h = cosh(r/2)
//!   region 4   c <= r < d   v: convex log ramp   h = cosh(r/2)
//!   region 5   d <= r < e   v = sinh(r/2)        h = cosh(r/2)
//!   region 6   e <= r < f   h_r: cubic in r      (h_theta stays cosh(r/2))
//!   region 7   f <= r       model warps          h_r = cosh r
//! ```
//!
//! Here `h` denotes the common value of `h_theta` and `h_r`, which agree
//! identically below `e`. Both are represented by piecewise curves built
//! from the same piece values in the same order, so their evaluations
//! agree bitwise there and callers can dispatch to the cancellation-free
//! equal-warp curvature path by comparing bits.
//!
//! With the optional tail enabled, `h` follows the analytic curve
//! `tau + e^{r/2}` below `o = ln tau`; the switch at `o` is exact to
//! machine precision, far below any smoothing threshold.
//!
//! Breakpoints found by root solving use plain bisection on monotone
//! brackets established analytically; every bracket is validated before
//! use and failures surface as construction errors rather than panics.

pub mod smoothing;

pub use smoothing::CornerSmoother;

use crate::error::{Error, Result};
use crate::frame::{LogWarpState, WarpFunctions, WarpState};
use smoothing::Jet2;

/// Bisection to floating point resolution on a bracket with a sign
/// change. Accepts either orientation of the sign change.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, what: &str) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::construction(format!(
            "no sign change bracketing {what}: f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `(sigma, 1 - sigma)` for the logistic `sigma = 1/(1 + e^{-x})`, with
/// both halves accurate into the subnormal range.
fn logistic_halves(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        let em = (-x).exp();
        (1.0 / (1.0 + em), em / (1.0 + em))
    } else {
        let ep = x.exp();
        (ep / (1.0 + ep), 1.0 / (1.0 + ep))
    }
}

/// `ln sinh(x)` for `x > 0`, stable for both tiny and large `x`.
fn ln_sinh(x: f64) -> f64 {
    x - std::f64::consts::LN_2 + (-(-2.0 * x).exp_m1()).ln()
}

/// `ln cosh(x)` for `x >= 0`, stable for large `x`.
fn ln_cosh(x: f64) -> f64 {
    x - std::f64::consts::LN_2 + (-2.0 * x).exp().ln_1p()
}

// ---------------------------------------------------------------------------
// Breakpoint layout
// ---------------------------------------------------------------------------

/// Radial breakpoints of the seven-region layout, all derived from the
/// collar thinness `epsilon` and the transition-length multiplier `k`.
#[derive(Debug, Clone, Copy)]
pub struct RegionSchedule {
    pub epsilon: f64,
    pub k: f64,
    /// Crossing radius of `eps e^r` and `sinh(r/2)`.
    pub r_eps: f64,
    /// Left end of the h-bridge.
    pub a: f64,
    /// Bridge / matching-parabola switch, where the parabola's
    /// logarithmic slope reaches 3/4.
    pub m: f64,
    /// Parabola / `cosh(r/2)` switch.
    pub b: f64,
    /// Start of the v ramp.
    pub c: f64,
    /// End of the v ramp; `v = sinh(r/2)` from here on.
    pub d: f64,
    /// Start of the `h_r` cubic.
    pub e: f64,
    /// End of the `h_r` cubic; model warps from here on.
    pub f: f64,
    /// `ln tau` for the analytic tail, when enabled.
    pub ln_tau: Option<f64>,
}

impl RegionSchedule {
    /// Region index at radius `r`: 0 for the tail (when enabled),
    /// otherwise 1 through 7.
    pub fn region_id(&self, r: f64) -> u8 {
        if let Some(o) = self.ln_tau {
            if r < o {
                return 0;
            }
        }
        match r {
            _ if r < self.a => 1,
            _ if r < self.b => 2,
            _ if r < self.c => 3,
            _ if r < self.d => 4,
            _ if r < self.e => 5,
            _ if r < self.f => 6,
            _ => 7,
        }
    }

    /// Named breakpoints in increasing order (tail switch first when
    /// present). `m` is included: it is a genuine corner of the curve
    /// even though it does not separate numbered regions.
    pub fn breakpoints(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if let Some(o) = self.ln_tau {
            out.push(("o", o));
        }
        out.extend([
            ("a", self.a),
            ("m", self.m),
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
        ]);
        out
    }

    /// Scan floor `p = 2 ln tau` used by tail audits.
    pub fn tail_floor(&self) -> Option<f64> {
        self.ln_tau.map(|o| 2.0 * o)
    }
}

// ---------------------------------------------------------------------------
// Pieces
// ---------------------------------------------------------------------------

/// The h-bridge on `[a, a + w]`: a log-space ramp taking the slope of
/// `ln h` from 1/2 to 3/4 with strictly positive curvature,
///
/// ```text
///   (ln h)'(r) = 1/2 + S(t)/4,   t = (r - a)/w,
///   S(t) = (1 - eta)(1 - (1 - t)^3) + eta t,
/// ```
///
/// so `S` rises 0 to 1 with `S' > 0` throughout (the `eta` term keeps the
/// exit slope of `S` positive). The length `w` is chosen by the schedule
/// so the bridge meets the matching parabola in both value and slope.
#[derive(Debug, Clone, Copy)]
pub struct HBridge {
    pub a: f64,
    pub w: f64,
    pub eta: f64,
}

impl HBridge {
    /// Mean of `S` over `[0, 1]`, which fixes the bridge length.
    pub fn ramp_mean(eta: f64) -> f64 {
        0.75 - 0.25 * eta
    }

    pub fn eval(&self, r: f64) -> Jet2 {
        let t = (r - self.a) / self.w;
        let omt = 1.0 - t;
        let e = self.eta;
        let s = (1.0 - e) * (1.0 - omt * omt * omt) + e * t;
        let ds = 3.0 * (1.0 - e) * omt * omt + e;
        // IS(t) = int_0^t S, so the value reproduces the slope law.
        let is = (1.0 - e) * (t + (omt * omt * omt * omt - 1.0) * 0.25) + e * t * t * 0.5;
        (
            0.5 * self.a + self.w * (0.5 * t + 0.25 * is),
            0.5 + 0.25 * s,
            0.25 * ds / self.w,
        )
    }
}

/// The matching parabola `q(r) = q0 + q1 (r - b) + eps^6 (r - b)^2`,
/// tangent to `cosh(r/2)` at `b`; the curve follows `ln q`.
#[derive(Debug, Clone, Copy)]
pub struct QParabola {
    pub b: f64,
    pub q0: f64,
    pub q1: f64,
    pub eps6: f64,
}

impl QParabola {
    /// Raw `(q, q', q'')` at `r`.
    pub fn q_jet(&self, r: f64) -> (f64, f64, f64) {
        let s = r - self.b;
        (
            self.q0 + s * (self.q1 + self.eps6 * s),
            self.q1 + 2.0 * self.eps6 * s,
            2.0 * self.eps6,
        )
    }

    pub fn eval(&self, r: f64) -> Jet2 {
        let (q, dq, ddq) = self.q_jet(r);
        let l = dq / q;
        (q.ln(), l, ddq / q - l * l)
    }
}

/// The v ramp on `[c, c + w]`: a convex log-space bend taking the slope
/// of `ln v` from 1 to `s_right`,
///
/// ```text
///   (ln v)'(r) = 1 + (s_right - 1) B(t),   t = (r - c)/w,
/// ```
///
/// with `B` a monomial profile (`t^p`, or its mirror image when the
/// required mean is large) whose exponent is solved so the total rise of
/// `ln v` lands exactly on `ln sinh` at the right end.
#[derive(Debug, Clone, Copy)]
pub struct VBend {
    pub c: f64,
    pub w: f64,
    pub ln_v_at_c: f64,
    pub s_right: f64,
    pub exponent: f64,
    pub mirrored: bool,
}

impl VBend {
    pub fn eval(&self, r: f64) -> Jet2 {
        let t = (r - self.c) / self.w;
        let p = self.exponent;
        let gain = self.s_right - 1.0;
        let (bt, dbt, ibt) = if self.mirrored {
            let omt = 1.0 - t;
            (
                1.0 - omt.powf(p),
                p * omt.powf(p - 1.0),
                t + (omt.powf(p + 1.0) - 1.0) / (p + 1.0),
            )
        } else {
            (t.powf(p), p * t.powf(p - 1.0), t.powf(p + 1.0) / (p + 1.0))
        };
        (
            self.ln_v_at_c + self.w * (t + gain * ibt),
            1.0 + gain * bt,
            gain * dbt / self.w,
        )
    }
}

/// The `h_r` transition cubic on `[e, f]`:
/// `phi(r) = c3 s^3 + c2 s^2 + c1 s + c0`, `s = r - e`, interpolating the
/// value and slope of `cosh(r/2)` at `e` and of `cosh(r)` at `f`. The
/// curve follows `ln phi`.
#[derive(Debug, Clone, Copy)]
pub struct CubicInterpolant {
    pub e: f64,
    pub span: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CubicInterpolant {
    /// Hermite cubic from `(cosh(e/2), sinh(e/2)/2)` at `e` to
    /// `(cosh(e + span), sinh(e + span))` at the right end.
    pub fn for_transition(e: f64, span: f64) -> Result<CubicInterpolant> {
        if !(e > 0.0 && span > 0.0 && (e + span).is_finite()) {
            return Err(Error::precondition(format!(
                "cubic transition needs 0 < e and 0 < span, got e = {e}, span = {span}"
            )));
        }
        let f = e + span;
        let c0 = (0.5 * e).cosh();
        let c1 = 0.5 * (0.5 * e).sinh();
        let dv = f.cosh() - c0 - c1 * span;
        let ds = f.sinh() - c1;
        let c3 = (ds * span - 2.0 * dv) / (span * span * span);
        let c2 = (3.0 * dv - ds * span) / (span * span);
        let cubic = CubicInterpolant {
            e,
            span,
            c3,
            c2,
            c1,
            c0,
        };
        cubic.check_monotone()?;
        Ok(cubic)
    }

    /// Verifies `phi' > 0` across `[e, e + span]`, which together with
    /// `phi(e) > 0` keeps `ln phi` well defined.
    fn check_monotone(&self) -> Result<()> {
        let min_dphi = min_cubic_slope(self.c1, self.c2, self.c3, self.span);
        if min_dphi <= 0.0 {
            return Err(Error::construction(format!(
                "transition cubic is not increasing (min phi' = {min_dphi}); \
                 the span {span} is too long for e = {e}",
                span = self.span,
                e = self.e
            )));
        }
        Ok(())
    }

    /// Raw `(phi, phi', phi'')` at `r`.
    pub fn phi_jet(&self, r: f64) -> (f64, f64, f64) {
        let s = r - self.e;
        (
            ((self.c3 * s + self.c2) * s + self.c1) * s + self.c0,
            (3.0 * self.c3 * s + 2.0 * self.c2) * s + self.c1,
            6.0 * self.c3 * s + 2.0 * self.c2,
        )
    }

    pub fn eval(&self, r: f64) -> Jet2 {
        let (phi, dphi, ddphi) = self.phi_jet(r);
        let l = dphi / phi;
        (phi.ln(), l, ddphi / phi - l * l)
    }
}

/// Minimum of `c1 + 2 c2 t + 3 c3 t^2` over `[0, span]`: both endpoints,
/// plus the interior vertex when the slope parabola opens upward.
fn min_cubic_slope(c1: f64, c2: f64, c3: f64, span: f64) -> f64 {
    let at = |t: f64| (3.0 * c3 * t + 2.0 * c2) * t + c1;
    let mut min = at(0.0).min(at(span));
    if c3 > 0.0 {
        let vertex = -c2 / (3.0 * c3);
        if vertex > 0.0 && vertex < span {
            min = min.min(at(vertex));
        }
    }
    min
}

/// The wide-span `h_r` transition on `[e, f]`: the same Hermite cubic
/// construction applied to `ln cosh` data instead of warp values.
///
/// The value cubic has to climb from values near 1 to `cosh f` with a
/// tiny starting slope; once the span is a few units long the
/// interpolant dips before the climb and stops being a warp function.
/// The log of the target data has slopes confined to `(0, 1)` by `tanh`,
/// so the cubic in log space stays increasing exactly in that regime.
#[derive(Debug, Clone, Copy)]
pub struct LogCubic {
    pub e: f64,
    pub span: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl LogCubic {
    /// Hermite cubic from `(ln cosh(e/2), tanh(e/2)/2)` at `e` to
    /// `(ln cosh(e + span), tanh(e + span))` at the right end.
    pub fn for_transition(e: f64, span: f64) -> Result<LogCubic> {
        if !(e > 0.0 && span > 0.0 && (e + span).is_finite()) {
            return Err(Error::precondition(format!(
                "cubic transition needs 0 < e and 0 < span, got e = {e}, span = {span}"
            )));
        }
        let f = e + span;
        let c0 = ln_cosh(0.5 * e);
        let c1 = 0.5 * (0.5 * e).tanh();
        let dv = ln_cosh(f) - c0 - c1 * span;
        let ds = f.tanh() - c1;
        let c3 = (ds * span - 2.0 * dv) / (span * span * span);
        let c2 = (3.0 * dv - ds * span) / (span * span);
        let min_slope = min_cubic_slope(c1, c2, c3, span);
        if min_slope <= 0.0 {
            return Err(Error::construction(format!(
                "log transition cubic is not increasing (min slope {min_slope}) \
                 on e = {e}, span = {span}"
            )));
        }
        Ok(LogCubic {
            e,
            span,
            c3,
            c2,
            c1,
            c0,
        })
    }

    /// `(ln phi, (ln phi)', (ln phi)'')` at `r`.
    pub fn eval(&self, r: f64) -> Jet2 {
        let s = r - self.e;
        (
            ((self.c3 * s + self.c2) * s + self.c1) * s + self.c0,
            (3.0 * self.c3 * s + 2.0 * self.c2) * s + self.c1,
            6.0 * self.c3 * s + 2.0 * self.c2,
        )
    }
}

/// Whichever interpolant the profile uses on the transition `[e, f]`.
#[derive(Debug, Clone, Copy)]
pub enum TransitionCubic {
    /// Cubic in warp values; the standard narrow-span construction.
    Value(CubicInterpolant),
    /// Cubic in log-warp values; the wide-span fallback.
    Log(LogCubic),
}

impl TransitionCubic {
    /// Raw `(phi, phi', phi'')` of the transition warp at `r`.
    pub fn phi_jet(&self, r: f64) -> (f64, f64, f64) {
        match self {
            TransitionCubic::Value(cubic) => cubic.phi_jet(r),
            TransitionCubic::Log(cubic) => {
                let (g, dg, ddg) = cubic.eval(r);
                let phi = g.exp();
                (phi, phi * dg, phi * (ddg + dg * dg))
            }
        }
    }
}

/// Analytic tail `ln(tau + e^{r/2})`, evaluated entirely in log space so
/// it remains exact when `tau` itself underflows.
#[derive(Debug, Clone, Copy)]
pub struct TailG {
    pub ln_tau: f64,
}

impl TailG {
    pub fn eval(&self, r: f64) -> Jet2 {
        let half = 0.5 * r;
        let hi = self.ln_tau.max(half);
        let val = hi + ((self.ln_tau - hi).exp() + (half - hi).exp()).ln();
        let (sigma, comp) = logistic_halves(half - self.ln_tau);
        (val, 0.5 * sigma, 0.25 * sigma * comp)
    }
}

/// One smooth piece of a log-warp curve.
#[derive(Debug, Clone, Copy)]
pub enum LogPiece {
    /// `ln(eps) + r`, the horospherical v.
    LinearExp { ln_eps: f64 },
    /// `r/2`, the horospherical h.
    HalfLine,
    /// `ln sinh(r/2)`.
    LogSinhHalf,
    /// `ln cosh(r/2)`.
    LogCoshHalf,
    /// `ln cosh(r)`.
    LogCosh,
    Bridge(HBridge),
    Parabola(QParabola),
    Bend(VBend),
    Cubic(CubicInterpolant),
    CubicLog(LogCubic),
    Tail(TailG),
}

impl LogPiece {
    pub fn eval(&self, r: f64) -> Jet2 {
        match self {
            LogPiece::LinearExp { ln_eps } => (ln_eps + r, 1.0, 0.0),
            LogPiece::HalfLine => (0.5 * r, 0.5, 0.0),
            LogPiece::LogSinhHalf => {
                let x = 0.5 * r;
                let em = (-2.0 * x).exp();
                let onem = -(-2.0 * x).exp_m1();
                (
                    ln_sinh(x),
                    0.5 * (1.0 + em) / onem,
                    -0.25 * (4.0 * em / (onem * onem)),
                )
            }
            LogPiece::LogCoshHalf => {
                let x = 0.5 * r;
                let em = (-2.0 * x).exp();
                let onep = 1.0 + em;
                (ln_cosh(x), 0.5 * (1.0 - em) / onep, 0.25 * (4.0 * em / (onep * onep)))
            }
            LogPiece::LogCosh => {
                let em = (-2.0 * r).exp();
                let onep = 1.0 + em;
                (ln_cosh(r), (1.0 - em) / onep, 4.0 * em / (onep * onep))
            }
            LogPiece::Bridge(p) => p.eval(r),
            LogPiece::Parabola(p) => p.eval(r),
            LogPiece::Bend(p) => p.eval(r),
            LogPiece::Cubic(p) => p.eval(r),
            LogPiece::CubicLog(p) => p.eval(r),
            LogPiece::Tail(p) => p.eval(r),
        }
    }
}

// ---------------------------------------------------------------------------
// Piecewise curves
// ---------------------------------------------------------------------------

/// A log-warp curve: smooth pieces separated by cuts, with selected
/// corners replaced by mollified windows.
#[derive(Debug)]
pub struct PiecewiseCurve {
    /// Strictly increasing; `pieces[i]` applies on `[cuts[i-1], cuts[i])`.
    cuts: Vec<f64>,
    pieces: Vec<LogPiece>,
    smoothers: Vec<CornerSmoother>,
}

impl PiecewiseCurve {
    pub fn new(cuts: Vec<f64>, pieces: Vec<LogPiece>) -> Result<PiecewiseCurve> {
        if pieces.len() != cuts.len() + 1 {
            return Err(Error::precondition(format!(
                "{} cuts require {} pieces, got {}",
                cuts.len(),
                cuts.len() + 1,
                pieces.len()
            )));
        }
        if cuts.windows(2).any(|w| !(w[0] < w[1])) || cuts.iter().any(|c| !c.is_finite()) {
            return Err(Error::precondition(
                "cuts must be finite and strictly increasing",
            ));
        }
        Ok(PiecewiseCurve {
            cuts,
            pieces,
            smoothers: Vec::new(),
        })
    }

    fn piece_index(&self, r: f64) -> usize {
        self.cuts.partition_point(|&c| c <= r)
    }

    /// Jet of the unsmoothed curve (corner pieces evaluated as built).
    pub fn eval_raw(&self, r: f64) -> Jet2 {
        self.pieces[self.piece_index(r)].eval(r)
    }

    /// Jet of the curve with corner windows smoothed.
    pub fn eval(&self, r: f64) -> Jet2 {
        for s in &self.smoothers {
            let (lo, hi) = s.affected();
            if r >= lo && r <= hi {
                return s.eval(r);
            }
        }
        self.eval_raw(r)
    }

    /// Intervals on which the smoothed curve differs from the raw pieces
    /// (mollified windows plus their absorption spans), in increasing
    /// order.
    pub fn windows(&self) -> Vec<(f64, f64)> {
        self.smoothers.iter().map(|s| s.affected()).collect()
    }

    /// Installs a mollified window of half-width `delta` at cut `index`,
    /// with absorption spans of the given widths on either side, unless
    /// the corner is already smooth to floating point resolution there
    /// (then the cut is left alone). Returns whether a window was
    /// installed.
    ///
    /// The spans must stay inside the adjacent pieces: the left span may
    /// not reach past cut `index - 1`, the right span not past cut
    /// `index + 1`.
    pub fn smooth_cut(
        &mut self,
        index: usize,
        delta: f64,
        span_left: f64,
        span_right: f64,
    ) -> Result<bool> {
        let corner = self.cuts[index];
        let left = self.pieces[index];
        let right = self.pieces[index + 1];
        let lj = left.eval(corner);
        let rj = right.eval(corner);

        let slope_scale = 1.0f64.max(lj.1.abs()).max(rj.1.abs());
        let curv_scale = 1.0f64.max(lj.2.abs()).max(rj.2.abs());
        let smooth_already =
            (lj.1 - rj.1).abs() <= 1e-12 * slope_scale && (lj.2 - rj.2).abs() <= 1e-9 * curv_scale;
        if smooth_already {
            return Ok(false);
        }
        let value_scale = 1.0f64.max(lj.0.abs());
        if (lj.0 - rj.0).abs() > 1e-8 * value_scale {
            return Err(Error::construction(format!(
                "cut at r = {corner} is not value-continuous ({} vs {})",
                lj.0, rj.0
            )));
        }
        // Each one-sided piece is evaluated over its span and, during
        // convolution, out to two window widths from the corner; both must
        // stay inside the piece's own domain.
        let reach_left = (delta + span_left).max(2.0 * delta);
        if index > 0 && corner - reach_left < self.cuts[index - 1] {
            return Err(Error::precondition(format!(
                "left span at r = {corner} reaches past the previous cut"
            )));
        }
        let reach_right = (delta + span_right).max(2.0 * delta);
        if index + 1 < self.cuts.len() && corner + reach_right > self.cuts[index + 1] {
            return Err(Error::precondition(format!(
                "right span at r = {corner} reaches past the next cut"
            )));
        }

        let smoother = CornerSmoother::for_log_curve(
            corner,
            delta,
            span_left,
            span_right,
            move |r| left.eval(r),
            move |r| right.eval(r),
        );
        // Keep affected ranges ordered and reject overlap outright:
        // overlapping ranges would make evaluation order-dependent.
        let (lo, hi) = smoother.affected();
        for existing in &self.smoothers {
            let (elo, ehi) = existing.affected();
            if lo <= ehi && elo <= hi {
                return Err(Error::construction(format!(
                    "smoothing ranges overlap near r = {corner}"
                )));
            }
        }
        self.smoothers.push(smoother);
        self.smoothers
            .sort_by(|x, y| x.corner().partial_cmp(&y.corner()).unwrap());
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// Profile construction
// ---------------------------------------------------------------------------

/// Parameters of the profile construction.
#[derive(Debug, Clone, Copy)]
pub struct ProfileConfig {
    /// Collar thinness; the deep metric has `v = epsilon e^r`.
    pub epsilon: f64,
    /// Length multiplier of the `h_r` transition: the cubic runs on
    /// `[e, (k+1) e]`.
    pub k: f64,
    /// Requested corner half-width; each corner is clamped to a quarter
    /// of its distance to the neighboring breakpoints.
    pub smoothing_delta: f64,
    /// Replace the deep horospherical `h` by the analytic curve
    /// `tau + e^{r/2}` below `ln tau`.
    pub with_tail: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            epsilon: 0.01,
            k: 40.0,
            smoothing_delta: 0.05,
            with_tail: false,
        }
    }
}

impl ProfileConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.15) {
            return Err(Error::precondition(format!(
                "epsilon must lie in (0, 0.15], got {}",
                self.epsilon
            )));
        }
        if !(self.k >= 1.0 && self.k.is_finite()) {
            return Err(Error::precondition(format!(
                "k must be finite and at least 1, got {}",
                self.k
            )));
        }
        if !(self.smoothing_delta > 0.0 && self.smoothing_delta.is_finite()) {
            return Err(Error::precondition(format!(
                "smoothing_delta must be positive, got {}",
                self.smoothing_delta
            )));
        }
        Ok(())
    }
}

/// The assembled profile: three smoothed log-warp curves plus the layout
/// they were built from.
#[derive(Debug)]
pub struct WarpProfile {
    pub schedule: RegionSchedule,
    pub config: ProfileConfig,
    pub v: PiecewiseCurve,
    pub h_theta: PiecewiseCurve,
    pub h_r: PiecewiseCurve,
    /// The pieces behind the curves, kept for direct inspection.
    pub bridge: HBridge,
    pub parabola: QParabola,
    pub bend: VBend,
    pub transition: TransitionCubic,
}

impl WarpProfile {
    /// Log-space warp state at radius `r` (always finite, any radius).
    pub fn log_state(&self, r: f64) -> LogWarpState {
        let (ln_v, l_v, dd_v) = self.v.eval(r);
        let (ln_ht, l_t, dd_t) = self.h_theta.eval(r);
        let (ln_hr, l_r, dd_r) = self.h_r.eval(r);
        LogWarpState {
            r,
            ln_v,
            l_v,
            q_v: dd_v + l_v * l_v,
            ln_h_theta: ln_ht,
            l_theta: l_t,
            q_theta: dd_t + l_t * l_t,
            ln_h_r: ln_hr,
            l_r,
            q_r: dd_r + l_r * l_r,
        }
    }

    /// Log-space state of the unsmoothed curves (corners as built).
    pub fn log_state_raw(&self, r: f64) -> LogWarpState {
        let (ln_v, l_v, dd_v) = self.v.eval_raw(r);
        let (ln_ht, l_t, dd_t) = self.h_theta.eval_raw(r);
        let (ln_hr, l_r, dd_r) = self.h_r.eval_raw(r);
        LogWarpState {
            r,
            ln_v,
            l_v,
            q_v: dd_v + l_v * l_v,
            ln_h_theta: ln_ht,
            l_theta: l_t,
            q_theta: dd_t + l_t * l_t,
            ln_h_r: ln_hr,
            l_r,
            q_r: dd_r + l_r * l_r,
        }
    }

    /// Materialized warp state; fails where a warp leaves the
    /// representable range.
    pub fn state(&self, r: f64) -> Result<WarpState> {
        let s = self.log_state(r);
        let v = s.ln_v.exp();
        let ht = s.ln_h_theta.exp();
        let hr = s.ln_h_r.exp();
        WarpState::new(
            r,
            v,
            v * s.l_v,
            v * s.q_v,
            ht,
            ht * s.l_theta,
            ht * s.q_theta,
            hr,
            hr * s.l_r,
            hr * s.q_r,
        )
    }

    pub fn region_id(&self, r: f64) -> u8 {
        self.schedule.region_id(r)
    }

    /// All smoothing windows of the three curves, sorted.
    pub fn smoothing_windows(&self) -> Vec<(f64, f64)> {
        let mut windows = self.v.windows();
        windows.extend(self.h_theta.windows());
        windows.extend(self.h_r.windows());
        windows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        windows.dedup();
        windows
    }
}

impl WarpFunctions for WarpProfile {
    fn state(&self, r: f64) -> Result<WarpState> {
        WarpProfile::state(self, r)
    }
}

/// Solves the breakpoint layout for the given parameters.
pub fn compute_schedule(config: &ProfileConfig) -> Result<RegionSchedule> {
    config.validate()?;
    let eps = config.epsilon;
    let ln_eps = eps.ln();

    // Crossing of eps e^r and sinh(r/2). The gap ln(eps e^r) - ln sinh(r/2)
    // is strictly decreasing exactly on (0, ln 3), positive at the left end
    // and negative at the right end for eps <= 0.15.
    let r_eps = bisect(
        1e-12,
        3f64.ln(),
        |r| ln_eps + r - ln_sinh(0.5 * r),
        "the collar crossing radius",
    )?;

    let eps4 = eps.powi(4);
    let c = r_eps - eps4;
    let b = 0.5 * c;
    let d = r_eps + 0.5 * eps4;
    let e = 2.0 * d;
    let f = (config.k + 1.0) * e;

    // Matching parabola tangent to cosh(r/2) at b.
    let parabola = QParabola {
        b,
        q0: (0.5 * b).cosh(),
        q1: 0.5 * (0.5 * b).sinh(),
        eps6: eps.powi(6),
    };

    // m: where the parabola's log slope reaches 3/4, left of b. In terms
    // of u = b - r the condition q'(u) = (3/4) q(u) is polynomial; the
    // bracket runs to the parabola's first root u0, where q' - (3/4) q is
    // positive since q' > 0 there while q vanishes.
    let disc = parabola.q1 * parabola.q1 - 4.0 * parabola.eps6 * parabola.q0;
    if disc <= 0.0 {
        return Err(Error::construction(
            "matching parabola has no real root; epsilon is too large",
        ));
    }
    let u0 = 2.0 * parabola.q0 / (parabola.q1 + disc.sqrt());
    let u_star = bisect(
        0.0,
        u0,
        |u| {
            let q = parabola.q0 - parabola.q1 * u + parabola.eps6 * u * u;
            let dq = parabola.q1 - 2.0 * parabola.eps6 * u;
            dq - 0.75 * q
        },
        "the bridge matching radius",
    )?;
    let m = b - u_star;

    // Bridge length from the value excess of ln q over the horospherical
    // line at m; the left end a is then the root of the (linear) value
    // matching condition.
    let eta = 0.05;
    let mu = HBridge::ramp_mean(eta);
    let ln_q_m = parabola.eval(m).0;
    let excess = ln_q_m - 0.5 * m;
    if excess <= 0.0 {
        return Err(Error::construction(format!(
            "bridge excess is not positive ({excess}); the schedule is degenerate"
        )));
    }
    let a = bisect(
        m - 8.0 * excess / mu,
        m,
        |a| 0.5 * m + 0.25 * (m - a) * mu - ln_q_m,
        "the bridge left end",
    )?;

    let ordered = a < m && m < b && b < c && c < d && d < e && e < f;
    if !ordered {
        return Err(Error::construction(format!(
            "breakpoints out of order: a={a}, m={m}, b={b}, c={c}, d={d}, e={e}, f={f}"
        )));
    }

    Ok(RegionSchedule {
        epsilon: eps,
        k: config.k,
        r_eps,
        a,
        m,
        b,
        c,
        d,
        e,
        f,
        ln_tau: config.with_tail.then_some(ln_eps + a),
    })
}

/// Builds the full profile: solves the layout, constructs the pieces,
/// assembles the three curves and smooths their corners.
pub fn build_profile(config: &ProfileConfig) -> Result<WarpProfile> {
    let schedule = compute_schedule(config)?;
    let eps = config.epsilon;
    let ln_eps = eps.ln();
    let (a, m, b, c, d, e, f) = (
        schedule.a, schedule.m, schedule.b, schedule.c, schedule.d, schedule.e, schedule.f,
    );

    let parabola = QParabola {
        b,
        q0: (0.5 * b).cosh(),
        q1: 0.5 * (0.5 * b).sinh(),
        eps6: eps.powi(6),
    };

    let bridge = HBridge {
        a,
        w: m - a,
        eta: 0.05,
    };

    // v ramp: slope 1 -> s_right over [c, d], total rise solved to land on
    // ln sinh(d/2).
    let s_right = LogPiece::LogSinhHalf.eval(d).1;
    let w_v = d - c;
    let rise_needed = ln_sinh(0.5 * d) - (ln_eps + c);
    let mean_needed = (rise_needed / w_v - 1.0) / (s_right - 1.0);
    if !(0.0..1.0).contains(&mean_needed) {
        return Err(Error::construction(format!(
            "v ramp needs a profile mean of {mean_needed}, outside (0, 1); \
             the ramp interval [{c}, {d}] cannot meet ln sinh"
        )));
    }
    let bend = if mean_needed < 0.5 {
        VBend {
            c,
            w: w_v,
            ln_v_at_c: ln_eps + c,
            s_right,
            exponent: 1.0 / mean_needed - 1.0,
            mirrored: false,
        }
    } else {
        VBend {
            c,
            w: w_v,
            ln_v_at_c: ln_eps + c,
            s_right,
            exponent: mean_needed / (1.0 - mean_needed),
            mirrored: true,
        }
    };

    let transition = match CubicInterpolant::for_transition(e, f - e) {
        Ok(cubic) => TransitionCubic::Value(cubic),
        Err(Error::Construction(_)) => {
            TransitionCubic::Log(LogCubic::for_transition(e, f - e)?)
        }
        Err(err) => return Err(err),
    };

    // Curves. h_theta and h_r are built from the same pieces in the same
    // order below e, so their evaluations agree bitwise there.
    let mut v_curve = PiecewiseCurve::new(
        vec![c, d],
        vec![
            LogPiece::LinearExp { ln_eps },
            LogPiece::Bend(bend),
            LogPiece::LogSinhHalf,
        ],
    )?;

    let mut h_cuts = vec![a, m, b];
    let mut h_pieces = vec![
        LogPiece::HalfLine,
        LogPiece::Bridge(bridge),
        LogPiece::Parabola(parabola),
        LogPiece::LogCoshHalf,
    ];
    if let Some(ln_tau) = schedule.ln_tau {
        h_cuts.insert(0, ln_tau);
        h_pieces.insert(0, LogPiece::Tail(TailG { ln_tau }));
    }
    let mut hr_cuts = h_cuts.clone();
    hr_cuts.extend([e, f]);
    let mut hr_pieces = h_pieces.clone();
    let transition_piece = match transition {
        TransitionCubic::Value(cubic) => LogPiece::Cubic(cubic),
        TransitionCubic::Log(cubic) => LogPiece::CubicLog(cubic),
    };
    hr_pieces.extend([transition_piece, LogPiece::LogCosh]);

    let mut h_theta_curve = PiecewiseCurve::new(h_cuts, h_pieces)?;
    let mut h_r_curve = PiecewiseCurve::new(hr_cuts, hr_pieces)?;

    // Corner windows and absorption spans sized against the union of all
    // breakpoints, so the same corner gets identical smoothing in every
    // curve (keeping h_theta and h_r bitwise equal below e) and no range
    // ever crosses a neighboring breakpoint. A sixteenth of the gap for
    // the window keeps the spans several windows wide, which makes the
    // span corrections cost O((delta / span)^2) of the ambient second
    // derivative; spans are capped at 1.0 since wider absorption buys
    // nothing.
    let mut union_cuts: Vec<f64> = schedule.breakpoints().iter().map(|&(_, x)| x).collect();
    union_cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let delta_for = |corner: f64| -> f64 {
        let mut delta = config.smoothing_delta;
        for &other in &union_cuts {
            if other != corner {
                delta = delta.min((other - corner).abs() / 16.0);
            }
        }
        delta
    };
    let spans_for = |corner: f64| -> (f64, f64) {
        let delta = delta_for(corner);
        let mut left = 1.0f64;
        let mut right = 1.0f64;
        for &other in &union_cuts {
            let edge_gap = (other - corner).abs() - delta - delta_for(other);
            if other < corner {
                left = left.min(0.35 * edge_gap);
            } else if other > corner {
                right = right.min(0.35 * edge_gap);
            }
        }
        (left, right)
    };

    let smooth_all = |curve: &mut PiecewiseCurve| -> Result<()> {
        for i in 0..curve.cuts.len() {
            let corner = curve.cuts[i];
            let (span_left, span_right) = spans_for(corner);
            curve.smooth_cut(i, delta_for(corner), span_left, span_right)?;
        }
        Ok(())
    };
    smooth_all(&mut v_curve)?;
    smooth_all(&mut h_theta_curve)?;
    smooth_all(&mut h_r_curve)?;

    Ok(WarpProfile {
        schedule,
        config: *config,
        v: v_curve,
        h_theta: h_theta_curve,
        h_r: h_r_curve,
        bridge,
        parabola,
        bend,
        transition,
    })
}
