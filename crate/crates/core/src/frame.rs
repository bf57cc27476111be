//! Orthonormal-frame data for doubly warped metrics of the form
//!
//! ```text
//!     lambda = v(r)^2 dtheta^2 + h_theta(r)^2 dS^2 + h_r(r)^2 dT^2 + dr^2
//! ```
//!
//! together with the structure constants, Levi-Civita connection and
//! curvature tensor expressed in the frame
//!
//! ```text
//!     Y1 = (1/v) d/dtheta,  Y2 = (1/h_theta) S,  Y3 = (1/h_r) T,  Y4 = d/dr.
//! ```
//!
//! Everything in this module is indexed 0-based: `Y1..Y4` are indices
//! `0..=3`, and `gamma[i][j][k]` stands for `<nabla_{Y_i} Y_j, Y_k>`.
//!
//! Curvature sign convention:
//!
//! ```text
//!     R(X, Y)Z = nabla_Y nabla_X Z - nabla_X nabla_Y Z + nabla_[X,Y] Z,
//!     R_ijkl   = <R(Y_i, Y_j) Y_k, Y_l>,
//! ```
//!
//! so that round spheres have positive sectional curvature and
//! `R_1212 = K(Y1, Y2)` for orthonormal frames.
//!
//! Internally all ratios of warp values are formed in log space. The warps
//! range over hundreds of orders of magnitude across a full profile (e.g.
//! `v ~ eps*e^r` deep in a cusp), and quotients like `h_r / (v h_theta)`
//! overflow long before the curvature components themselves do.

use crate::error::{Error, Result};

/// Smallest warp value accepted by [`WarpState::new`]. Values this small
/// leave no headroom for the quotients in the structure constants.
pub const MIN_WARP: f64 = 1e-300;

/// Pointwise data of a warped metric at radius `r`: the three warp values
/// and their first two radial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpState {
    pub r: f64,
    pub v: f64,
    pub dv: f64,
    pub ddv: f64,
    pub h_theta: f64,
    pub dh_theta: f64,
    pub ddh_theta: f64,
    pub h_r: f64,
    pub dh_r: f64,
    pub ddh_r: f64,
}

impl WarpState {
    /// Validates positivity and finiteness of the warp data.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r: f64,
        v: f64,
        dv: f64,
        ddv: f64,
        h_theta: f64,
        dh_theta: f64,
        ddh_theta: f64,
        h_r: f64,
        dh_r: f64,
        ddh_r: f64,
    ) -> Result<Self> {
        let state = WarpState {
            r,
            v,
            dv,
            ddv,
            h_theta,
            dh_theta,
            ddh_theta,
            h_r,
            dh_r,
            ddh_r,
        };
        state.validate()?;
        Ok(state)
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            self.r,
            self.v,
            self.dv,
            self.ddv,
            self.h_theta,
            self.dh_theta,
            self.ddh_theta,
            self.h_r,
            self.dh_r,
            self.ddh_r,
        ];
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(format!(
                "warp state at r = {} contains non-finite entries",
                self.r
            )));
        }
        for (name, value) in [("v", self.v), ("h_theta", self.h_theta), ("h_r", self.h_r)] {
            if !(value >= MIN_WARP) {
                return Err(Error::domain(format!(
                    "warp {name} = {value:e} at r = {} is below the representable floor {MIN_WARP:e}",
                    self.r
                )));
            }
        }
        Ok(())
    }

    /// Log-space view of the same state.
    pub fn to_log(&self) -> LogWarpState {
        LogWarpState {
            r: self.r,
            ln_v: self.v.ln(),
            l_v: self.dv / self.v,
            q_v: self.ddv / self.v,
            ln_h_theta: self.h_theta.ln(),
            l_theta: self.dh_theta / self.h_theta,
            q_theta: self.ddh_theta / self.h_theta,
            ln_h_r: self.h_r.ln(),
            l_r: self.dh_r / self.h_r,
            q_r: self.ddh_r / self.h_r,
        }
    }
}

/// The same pointwise data in logarithmic variables: `ln f`, the
/// logarithmic derivative `L = f'/f` and the curvature quotient
/// `Q = f''/f` for each warp `f`.
///
/// This representation stays finite on cusp profiles where the raw warps
/// underflow `f64` (e.g. `ln v = ln(eps) + r` at `r ~ -1500`), which is why
/// the audit pipeline works with it directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWarpState {
    pub r: f64,
    pub ln_v: f64,
    pub l_v: f64,
    pub q_v: f64,
    pub ln_h_theta: f64,
    pub l_theta: f64,
    pub q_theta: f64,
    pub ln_h_r: f64,
    pub l_r: f64,
    pub q_r: f64,
}

impl LogWarpState {
    /// True when the two sphere-distribution warps carry bitwise identical
    /// data, i.e. the state lies in the equal-warp regime `h_theta = h_r`.
    pub fn is_equal_warp(&self) -> bool {
        self.ln_h_theta == self.ln_h_r && self.l_theta == self.l_r && self.q_theta == self.q_r
    }
}

/// Coefficients `(alpha1, alpha2, alpha3)` parameterizing the tangential
/// structure constants
///
/// ```text
///     [Y1, Y2] = alpha3 * h_r/(v h_theta) * Y3,
///     [Y1, Y3] = alpha2 * h_theta/(v h_r) * Y2,
///     [Y2, Y3] = alpha1 * v/(h_theta h_r) * Y1.
/// ```
///
/// The frame adapted to the complex hyperbolic plane has
/// `(1/2, 1/2, -1/2)`; other values describe candidate frames that fail
/// either the curvature equations or the integrability residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketTable {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl BracketTable {
    pub const fn canonical() -> Self {
        BracketTable {
            alpha1: 0.5,
            alpha2: 0.5,
            alpha3: -0.5,
        }
    }

    /// All tangential structure constants zero; the frame of a product
    /// metric. Useful as a negative control in integrability tests.
    pub const fn zero() -> Self {
        BracketTable {
            alpha1: 0.0,
            alpha2: 0.0,
            alpha3: 0.0,
        }
    }
}

impl Default for BracketTable {
    fn default() -> Self {
        BracketTable::canonical()
    }
}

/// Structure constants of the frame: `coeff[i][j][m]` is the `Y_m`
/// coefficient of `[Y_i, Y_j]`. Antisymmetric in `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketCoefficients {
    pub coeff: [[[f64; 4]; 4]; 4],
}

/// Structure constants at `state` for the bracket family `table`.
///
/// The radial brackets are forced by the frame normalization:
/// `[Y_i, Y4] = (f_i'/f_i) Y_i` for the warp `f_i` scaling `Y_i`.
pub fn lie_brackets(state: &WarpState, table: &BracketTable) -> Result<BracketCoefficients> {
    state.validate()?;
    Ok(lie_brackets_log(&state.to_log(), table))
}

/// Log-space variant of [`lie_brackets`]; never overflows on valid input.
pub fn lie_brackets_log(state: &LogWarpState, table: &BracketTable) -> BracketCoefficients {
    let mut coeff = [[[0.0f64; 4]; 4]; 4];

    // Quotients h_r/(v h_theta) etc. formed in log space.
    let q23 = (state.ln_h_r - state.ln_v - state.ln_h_theta).exp();
    let q32 = (state.ln_h_theta - state.ln_v - state.ln_h_r).exp();
    let q11 = (state.ln_v - state.ln_h_theta - state.ln_h_r).exp();

    let mut set = |i: usize, j: usize, m: usize, value: f64| {
        coeff[i][j][m] = value;
        coeff[j][i][m] = -value;
    };

    set(0, 1, 2, table.alpha3 * q23); // [Y1, Y2]
    set(0, 2, 1, table.alpha2 * q32); // [Y1, Y3]
    set(1, 2, 0, table.alpha1 * q11); // [Y2, Y3]
    set(0, 3, 0, state.l_v); //          [Y1, Y4]
    set(1, 3, 1, state.l_theta); //      [Y2, Y4]
    set(2, 3, 2, state.l_r); //          [Y3, Y4]

    BracketCoefficients { coeff }
}

/// Connection coefficients `gamma[i][j][k] = <nabla_{Y_i} Y_j, Y_k>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionCoefficients {
    pub gamma: [[[f64; 4]; 4]; 4],
}

/// Levi-Civita connection of the frame via the Koszul formula.
///
/// Since all inner products of frame fields are constant, the Koszul
/// formula reduces to bracket terms only:
///
/// ```text
///     <nabla_Y X, Z> = -1/2 ( <[X,Z],Y> + <[Y,Z],X> + <[X,Y],Z> ).
/// ```
pub fn connection_coefficients(state: &WarpState, table: &BracketTable) -> Result<ConnectionCoefficients> {
    let brackets = lie_brackets(state, table)?;
    Ok(connection_from_brackets(&brackets))
}

/// The reduced Koszul formula applied to precomputed structure constants.
pub fn connection_from_brackets(brackets: &BracketCoefficients) -> ConnectionCoefficients {
    let b = &brackets.coeff;
    let mut gamma = [[[0.0f64; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                // <nabla_{Y_i} Y_j, Y_k> with X = Y_j, Y = Y_i, Z = Y_k.
                gamma[i][j][k] = -0.5 * (b[j][k][i] + b[i][k][j] + b[j][i][k]);
            }
        }
    }
    ConnectionCoefficients { gamma }
}

/// The nine potentially nonzero independent curvature components of a
/// doubly warped metric in the canonical frame.
///
/// In the naming, `r1234` stands for `<R(Y1, Y2) Y3, Y4>` and so on; every
/// other nonzero component follows from the pair symmetries and the first
/// Bianchi identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureComponents {
    pub r1212: f64,
    pub r1313: f64,
    pub r2323: f64,
    pub r1234: f64,
    pub r1324: f64,
    pub r1423: f64,
    pub r1414: f64,
    pub r2424: f64,
    pub r3434: f64,
}

impl CurvatureComponents {
    pub const NAMES: [&'static str; 9] = [
        "r1212", "r1313", "r2323", "r1234", "r1324", "r1423", "r1414", "r2424", "r3434",
    ];

    pub fn as_array(&self) -> [f64; 9] {
        [
            self.r1212, self.r1313, self.r2323, self.r1234, self.r1324, self.r1423, self.r1414,
            self.r2424, self.r3434,
        ]
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &CurvatureComponents) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Largest componentwise difference measured relative to the magnitude
    /// of the reference component (absolute below magnitude one).
    pub fn max_rel_diff(&self, other: &CurvatureComponents) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// First Bianchi residual `R_1234 + R_1423 - R_1324`; vanishes for the
/// curvature tensor of any torsion-free connection.
///
/// Note the middle term: with all indices written in the first slot order,
/// the cyclic sum is `R_1234 + R_1342 + R_1423`, and `R_1342 = -R_1324`.
pub fn bianchi_residual(components: &CurvatureComponents) -> f64 {
    components.r1234 + components.r1423 - components.r1324
}

/// Curvature components in the canonical frame, evaluated from the
/// closed-form expressions for a doubly warped metric.
///
/// Writing `a = v/(2 h_theta h_r)`, `b = h_theta/(2 v h_r)`,
/// `c = h_r/(2 v h_theta)` and `L_f = f'/f`, the components are
///
/// ```text
///   R_1212 = -L_v L_theta - 1/4 (-a^2 - b^2 + 3c^2 - 2ab + 2ac - 2bc)
///   R_1313 = -L_v L_r     - 1/4 (-a^2 + 3b^2 - c^2 + 2ab - 2ac - 2bc)
///   R_2323 = -L_theta L_r - 1/4 (3a^2 - b^2 - c^2 + 2ab + 2ac + 2bc)
///   R_1234 = -1/2 [ (a+b)(L_theta - L_v) - c (2L_r - L_v - L_theta) ]
///   R_1324 =  1/2 [ (a+c)(L_r - L_v)     - b (2L_theta - L_v - L_r) ]
///   R_1423 = -1/2 [ (b-c)(L_theta - L_r) + a (2L_v - L_theta - L_r) ]
///   R_1414 = -v''/v,   R_2424 = -h_theta''/h_theta,   R_3434 = -h_r''/h_r.
/// ```
///
/// The quadratic polynomials are evaluated in a factored form that cancels
/// exactly when `h_theta = h_r` (where `b = c`), so the general path agrees
/// bitwise with [`curvature_components_equal_warp`] instead of losing all
/// precision to the `-b^2 + 3c^2 - 2bc` cancellation.
pub fn curvature_components(state: &WarpState) -> Result<CurvatureComponents> {
    state.validate()?;
    Ok(curvature_components_log(&state.to_log()))
}

/// Log-space variant of [`curvature_components`].
pub fn curvature_components_log(s: &LogWarpState) -> CurvatureComponents {
    let a = 0.5 * (s.ln_v - s.ln_h_theta - s.ln_h_r).exp();
    let b = 0.5 * (s.ln_h_theta - s.ln_v - s.ln_h_r).exp();
    let c = 0.5 * (s.ln_h_r - s.ln_v - s.ln_h_theta).exp();
    let (lv, lt, lr) = (s.l_v, s.l_theta, s.l_r);
    let bc = b - c;

    // -a^2 - b^2 + 3c^2 - 2ab + 2ac - 2bc  =  -a^2 - (b-c)(2a + b + 3c)
    let t12 = -a * a - bc * (2.0 * a + b + 3.0 * c);
    // -a^2 + 3b^2 - c^2 + 2ab - 2ac - 2bc  =  -a^2 + (b-c)(2a + 3b + c)
    let t13 = -a * a + bc * (2.0 * a + 3.0 * b + c);
    // 3a^2 - b^2 - c^2 + 2ab + 2ac + 2bc   =  3a^2 + 2a(b+c) - (b-c)^2
    let t23 = 3.0 * a * a + 2.0 * a * (b + c) - bc * bc;

    CurvatureComponents {
        r1212: -lv * lt - 0.25 * t12,
        r1313: -lv * lr - 0.25 * t13,
        r2323: -lt * lr - 0.25 * t23,
        r1234: -0.5 * ((a + bc) * (lt - lv) - 2.0 * c * (lr - lt)),
        r1324: 0.5 * ((a - bc) * (lr - lv) + 2.0 * b * (lr - lt)),
        r1423: -0.5 * (bc * (lt - lr) + a * ((lv - lt) + (lv - lr))),
        r1414: -s.q_v,
        r2424: -s.q_theta,
        r3434: -s.q_r,
    }
}

/// Relative tolerance on `h_theta` vs `h_r` accepted by the equal-warp path.
pub const EQUAL_WARP_TOL: f64 = 1e-9;

/// Curvature components in the equal-warp regime `h := h_theta = h_r`,
/// evaluated from the specialized formulas
///
/// ```text
///   K(Y1,Y2) = K(Y1,Y3) = -v'h'/(v h) + v^2/(16 h^4)
///   K(Y2,Y3) = -1/(4h^2) - 3v^2/(16 h^4) - (h'/h)^2
///   K(Y1,Y4) = -v''/v,    K(Y2,Y4) = K(Y3,Y4) = -h''/h
///   R_1423 = -(v/(2h^2)) (ln(v/h))',   R_1234 = -R_1324 = (v/(2h^2)) skipped
/// ```
///
/// with `R_1234 = (v/(4h^2)) (ln(v/h))'` and `R_1324 = (1/2) R_1423`.
///
/// Unlike the general path this never forms `1/h^2` and `v/h^2` separately
/// from quantities of wildly different magnitude, so it remains accurate
/// arbitrarily deep in a cusp; `1/h^2` may still overflow to `+inf` there,
/// in which case `R_2323` is reported as `-inf` (the true value exceeds
/// every finite double and every consumer treats it as an honest lower
/// bound).
pub fn curvature_components_equal_warp(state: &WarpState) -> Result<CurvatureComponents> {
    state.validate()?;
    let rel = ((state.h_theta - state.h_r) / state.h_theta).abs();
    let drel = (state.dh_theta - state.dh_r).abs() / state.dh_theta.abs().max(1.0);
    if rel > EQUAL_WARP_TOL || drel > EQUAL_WARP_TOL {
        return Err(Error::precondition(format!(
            "equal-warp curvature requested but h_theta and h_r differ by {rel:e} (values) / {drel:e} (slopes) at r = {}",
            state.r
        )));
    }
    Ok(curvature_components_equal_warp_log(&state.to_log()))
}

/// Log-space variant of [`curvature_components_equal_warp`]; uses the
/// `h_theta` channel as the common warp.
pub fn curvature_components_equal_warp_log(s: &LogWarpState) -> CurvatureComponents {
    let (lv, lh) = (s.l_v, s.l_theta);
    // w = v/h^2 and u = 1/h^2; w stays moderate on cusp profiles while u
    // may overflow, which only ever makes R_2323 an honest -inf.
    let w = (s.ln_v - 2.0 * s.ln_h_theta).exp();
    let u = (-2.0 * s.ln_h_theta).exp();

    let k12 = -lv * lh + w * w / 16.0;
    let r1234 = 0.25 * (w * (lv - lh));
    let r1423 = -0.5 * (w * (lv - lh));

    CurvatureComponents {
        r1212: k12,
        r1313: k12,
        r2323: -0.25 * u - 3.0 * (w * w) / 16.0 - lh * lh,
        r1234,
        r1324: -r1234,
        r1423,
        r1414: -s.q_v,
        r2424: -s.q_theta,
        r3434: -s.q_theta,
    }
}

/// The full `(4,0)` curvature tensor `R[i][j][k][l] = <R(Y_i,Y_j)Y_k, Y_l>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullTensor {
    pub r: [[[[f64; 4]; 4]; 4]; 4],
}

impl FullTensor {
    pub fn zero() -> Self {
        FullTensor {
            r: [[[[0.0; 4]; 4]; 4]; 4],
        }
    }

    /// Component accessor with 0-based indices.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.r[i][j][k][l]
    }

    /// Extracts the nine independent components tracked by
    /// [`CurvatureComponents`].
    pub fn components(&self) -> CurvatureComponents {
        CurvatureComponents {
            r1212: self.r[0][1][0][1],
            r1313: self.r[0][2][0][2],
            r2323: self.r[1][2][1][2],
            r1234: self.r[0][1][2][3],
            r1324: self.r[0][2][1][3],
            r1423: self.r[0][3][1][2],
            r1414: self.r[0][3][0][3],
            r2424: self.r[1][3][1][3],
            r3434: self.r[2][3][2][3],
        }
    }
}

/// Populates the full tensor from the nine independent components using
/// the antisymmetries in each index pair and the pair-exchange symmetry:
/// for each seed value `R_ijkl = x` the eight images
///
/// ```text
///   R_ijkl = R_klij = R_jilk = R_lkji = x,
///   R_jikl = R_ijlk = R_lkij = R_klji = -x
/// ```
///
/// are assigned. Components outside these orbits vanish for doubly warped
/// metrics (this is checked against the Koszul oracle in the test suite).
pub fn expand_full_tensor(components: &CurvatureComponents) -> FullTensor {
    let mut t = FullTensor::zero();
    let seeds: [(usize, usize, usize, usize, f64); 9] = [
        (0, 1, 0, 1, components.r1212),
        (0, 2, 0, 2, components.r1313),
        (1, 2, 1, 2, components.r2323),
        (0, 1, 2, 3, components.r1234),
        (0, 2, 1, 3, components.r1324),
        (0, 3, 1, 2, components.r1423),
        (0, 3, 0, 3, components.r1414),
        (1, 3, 1, 3, components.r2424),
        (2, 3, 2, 3, components.r3434),
    ];
    for (i, j, k, l, x) in seeds {
        t.r[i][j][k][l] = x;
        t.r[j][i][k][l] = -x;
        t.r[i][j][l][k] = -x;
        t.r[j][i][l][k] = x;
        t.r[k][l][i][j] = x;
        t.r[l][k][i][j] = -x;
        t.r[k][l][j][i] = -x;
        t.r[l][k][j][i] = x;
    }
    t
}

/// A family of warp states parameterized by the radius, smooth on the
/// radii where the oracle differentiates it.
pub trait WarpFunctions {
    fn state(&self, r: f64) -> Result<WarpState>;
}

/// Curvature tensor computed directly from the connection, without using
/// any closed-form component expression.
///
/// The connection coefficients are functions of `r` alone, so
///
/// ```text
///   <R(Y_i,Y_j)Y_k, Y_l> = d_{j4} gamma'[i][k][l] - d_{i4} gamma'[j][k][l]
///       + sum_m ( gamma[i][k][m] gamma[j][m][l] - gamma[j][k][m] gamma[i][m][l] )
///       + sum_m b[i][j][m] gamma[m][k][l],
/// ```
///
/// where `gamma'` is approximated by a second-order central difference
/// with step `fd_step`. This is the independent cross-check ("oracle") for
/// the closed forms: it only ever sees brackets and the Koszul formula.
pub fn koszul_full_tensor(
    profile: &dyn WarpFunctions,
    r: f64,
    fd_step: f64,
) -> Result<FullTensor> {
    if !(fd_step > 0.0) || !fd_step.is_finite() {
        return Err(Error::precondition(format!(
            "finite-difference step must be positive, got {fd_step}"
        )));
    }
    let table = BracketTable::canonical();
    let center = profile.state(r)?;
    let plus = profile.state(r + fd_step)?;
    let minus = profile.state(r - fd_step)?;

    let b = lie_brackets(&center, &table)?;
    let g0 = connection_from_brackets(&b);
    let gp = connection_from_brackets(&lie_brackets(&plus, &table)?);
    let gm = connection_from_brackets(&lie_brackets(&minus, &table)?);

    let mut dgamma = [[[0.0f64; 4]; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                dgamma[i][j][k] = (gp.gamma[i][j][k] - gm.gamma[i][j][k]) / (2.0 * fd_step);
            }
        }
    }

    let g = &g0.gamma;
    let mut t = FullTensor::zero();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut value = 0.0;
                    if j == 3 {
                        value += dgamma[i][k][l];
                    }
                    if i == 3 {
                        value -= dgamma[j][k][l];
                    }
                    for m in 0..4 {
                        value += g[i][k][m] * g[j][m][l] - g[j][k][m] * g[i][m][l];
                        value += b.coeff[i][j][m] * g[m][k][l];
                    }
                    t.r[i][j][k][l] = value;
                }
            }
        }
    }
    Ok(t)
}

/// The nine tracked components as computed by the connection-level oracle;
/// see [`koszul_full_tensor`].
pub fn koszul_curvature_oracle(
    profile: &dyn WarpFunctions,
    r: f64,
    fd_step: f64,
) -> Result<CurvatureComponents> {
    Ok(koszul_full_tensor(profile, r, fd_step)?.components())
}
