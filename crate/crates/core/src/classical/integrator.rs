//! Dormand-Prince 8(5,3) explicit Runge-Kutta integrator for small autonomous systems.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const N_STAGES: usize = 12;

// Stage nodes; only the tableau check reads them.
#[cfg_attr(not(test), allow(dead_code))]
const C: [f64; N_STAGES] = [
    0.0,
    0.526001519587677318785587544488e-01,
    0.789002279381515978178381316732e-01,
    0.118350341907227396726757197510,
    0.281649658092772603273242802490,
    0.333333333333333333333333333333,
    0.25,
    0.307692307692307692307692307692,
    0.651282051282051282051282051282,
    0.6,
    0.857142857142857142857142857142,
    1.0,
];

const A: [[f64; N_STAGES]; N_STAGES] = {
    let mut a = [[0.0; N_STAGES]; N_STAGES];
    a[1][0] = 5.26001519587677318785587544488e-2;

    a[2][0] = 1.97250569845378994544595329183e-2;
    a[2][1] = 5.91751709536136983633785987549e-2;

    a[3][0] = 2.95875854768068491816892993775e-2;
    a[3][2] = 8.87627564304205475450678981324e-2;

    a[4][0] = 2.41365134159266685502369798665e-1;
    a[4][2] = -8.84549479328286085344864962717e-1;
    a[4][3] = 9.24834003261792003115737966543e-1;

    a[5][0] = 3.7037037037037037037037037037e-2;
    a[5][3] = 1.70828608729473871279604482173e-1;
    a[5][4] = 1.25467687566822425016691814123e-1;

    a[6][0] = 3.7109375e-2;
    a[6][3] = 1.70252211019544039314978060272e-1;
    a[6][4] = 6.02165389804559606850219397283e-2;
    a[6][5] = -1.7578125e-2;

    a[7][0] = 3.70920001185047927108779319836e-2;
    a[7][3] = 1.70383925712239993810214054705e-1;
    a[7][4] = 1.07262030446373284651809199168e-1;
    a[7][5] = -1.53194377486244017527936158236e-2;
    a[7][6] = 8.27378916381402288758473766002e-3;

    a[8][0] = 6.24110958716075717114429577812e-1;
    a[8][3] = -3.36089262944694129406857109825;
    a[8][4] = -8.68219346841726006818189891453e-1;
    a[8][5] = 2.75920996994467083049415600797e1;
    a[8][6] = 2.01540675504778934086186788979e1;
    a[8][7] = -4.34898841810699588477366255144e1;

    a[9][0] = 4.77662536438264365890433908527e-1;
    a[9][3] = -2.48811461997166764192642586468;
    a[9][4] = -5.90290826836842996371446475743e-1;
    a[9][5] = 2.12300514481811942347288949897e1;
    a[9][6] = 1.52792336328824235832596922938e1;
    a[9][7] = -3.32882109689848629194453265587e1;
    a[9][8] = -2.03312017085086261358222928593e-2;

    a[10][0] = -9.3714243008598732571704021658e-1;
    a[10][3] = 5.18637242884406370830023853209;
    a[10][4] = 1.09143734899672957818500254654;
    a[10][5] = -8.14978701074692612513997267357;
    a[10][6] = -1.85200656599969598641566180701e1;
    a[10][7] = 2.27394870993505042818970056734e1;
    a[10][8] = 2.49360555267965238987089396762;
    a[10][9] = -3.0467644718982195003823669022;

    a[11][0] = 2.27331014751653820792359768449;
    a[11][3] = -1.05344954667372501984066689879e1;
    a[11][4] = -2.00087205822486249909675718444;
    a[11][5] = -1.79589318631187989172765950534e1;
    a[11][6] = 2.79488845294199600508499808837e1;
    a[11][7] = -2.85899827713502369474065508674;
    a[11][8] = -8.87285693353062954433549289258;
    a[11][9] = 1.23605671757943030647266201528e1;
    a[11][10] = 6.43392746015763530355970484046e-1;
    a
};

const B: [f64; N_STAGES] = [
    5.42937341165687622380535766363e-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566,
    1.89151789931450038304281599044,
    -5.8012039600105847814672114227,
    3.1116436695781989440891606237e-1,
    -1.52160949662516078556178806805e-1,
    2.01365400804030348374776537501e-1,
    4.47106157277725905176885569043e-2,
];

/// Third-order error weights (applied to stages 0..12, the last being the FSAL stage).
const E3: [f64; N_STAGES + 1] = [
    B[0] - 0.244094488188976377952755905512,
    0.0,
    0.0,
    0.0,
    0.0,
    B[5],
    B[6],
    B[7],
    B[8] - 0.733846688281611857341361741547,
    B[9],
    B[10],
    B[11] - 0.220588235294117647058823529412e-1,
    0.0,
];

const E5: [f64; N_STAGES + 1] = [
    0.1312004499419488073250102996e-1,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753e+1,
    -0.4957589496572501915214079952,
    0.1664377182454986536961530415e+1,
    -0.3503288487499736816886487290,
    0.3341791187130174790297318841,
    0.8192320648511571246570742613e-1,
    -0.2235530786388629525884427845e-1,
    0.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Adaptive DOP853 settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dop853 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub max_step: f64,
}

impl Dop853 {
    pub fn new(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 1_000_000, max_step: f64::INFINITY }
    }

    /// Integrate `y' = f(y)` from `t = 0` to `t_end`, calling `observer(t, y)` after every
    /// accepted step (and once at the start).
    /// Returns the final state.
    pub fn integrate<const N: usize>(
        &self,
        f: impl Fn(&[f64; N]) -> [f64; N],
        y0: [f64; N],
        t_end: f64,
        mut observer: impl FnMut(f64, &[f64; N]),
    ) -> Result<[f64; N]> {
        observer(0.0, &y0);
        if t_end == 0.0 {
            return Ok(y0);
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("integration span must be >= 0, got {t_end}")));
        }
        let mut y = y0;
        let mut t = 0.0;
        let mut k0 = f(&y);
        let mut h = self.initial_step(&f, &y, &k0).min(t_end).min(self.max_step);
        let mut steps = 0usize;
        let mut rejected_last = false;
        let mut k = [[0.0; N]; N_STAGES + 1];

        while t < t_end {
            if steps >= self.max_steps {
                return Err(Error::NotConverged { iterations: steps, residual: t_end - t });
            }
            let mut last = false;
            if t + h >= t_end {
                h = t_end - t;
                last = true;
            }
            k[0] = k0;
            for s in 1..N_STAGES {
                let mut ys = y;
                for i in 0..N {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    ys[i] += h * acc;
                }
                k[s] = f(&ys);
            }
            let mut y_new = y;
            for i in 0..N {
                let mut acc = 0.0;
                for s in 0..N_STAGES {
                    acc += B[s] * k[s][i];
                }
                y_new[i] += h * acc;
            }
            k[N_STAGES] = f(&y_new);

            let mut err5 = 0.0;
            let mut err3 = 0.0;
            for i in 0..N {
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                let mut e5 = 0.0;
                let mut e3 = 0.0;
                for s in 0..=N_STAGES {
                    e5 += E5[s] * k[s][i];
                    e3 += E3[s] * k[s][i];
                }
                err5 += (e5 / scale).powi(2);
                err3 += (e3 / scale).powi(2);
            }
            let err = if err5 == 0.0 && err3 == 0.0 {
                0.0
            } else {
                h.abs() * err5 / ((err5 + 0.01 * err3) * N as f64).sqrt()
            };

            if err <= 1.0 {
                t = if last { t_end } else { t + h };
                y = y_new;
                k0 = k[N_STAGES];
                observer(t, &y);
                steps += 1;
                let mut factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-1.0 / 8.0)).min(MAX_FACTOR) };
                if rejected_last {
                    factor = factor.min(1.0);
                }
                rejected_last = false;
                h = (h * factor).min(self.max_step);
            } else {
                rejected_last = true;
                h *= (SAFETY * err.powf(-1.0 / 8.0)).max(MIN_FACTOR);
                if h < 1e-14 * t_end.max(1.0) {
                    return Err(Error::NotConverged { iterations: steps, residual: err });
                }
            }
        }
        Ok(y)
    }

    /// Fixed-step integration with `n_steps` equal steps of the eighth-order solution.
    ///
    /// The end point is then a smooth function of `y0`, which finite-difference
    /// Jacobians rely on.
    pub fn integrate_fixed<const N: usize>(
        f: impl Fn(&[f64; N]) -> [f64; N],
        y0: [f64; N],
        t_end: f64,
        n_steps: usize,
    ) -> [f64; N] {
        if n_steps == 0 || t_end == 0.0 {
            return y0;
        }
        let h = t_end / n_steps as f64;
        let mut y = y0;
        let mut k = [[0.0; N]; N_STAGES];
        for _ in 0..n_steps {
            k[0] = f(&y);
            for s in 1..N_STAGES {
                let mut ys = y;
                for i in 0..N {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    ys[i] += h * acc;
                }
                k[s] = f(&ys);
            }
            for i in 0..N {
                let mut acc = 0.0;
                for s in 0..N_STAGES {
                    acc += B[s] * k[s][i];
                }
                y[i] += h * acc;
            }
        }
        y
    }

    fn initial_step<const N: usize>(&self, f: &impl Fn(&[f64; N]) -> [f64; N], y: &[f64; N], f0: &[f64; N]) -> f64 {
        let scale: Vec<f64> = y.iter().map(|v| self.atol + self.rtol * v.abs()).collect();
        let rms = |v: &dyn Fn(usize) -> f64| ((0..N).map(|i| v(i).powi(2)).sum::<f64>() / N as f64).sqrt();
        let d0 = rms(&|i| y[i] / scale[i]);
        let d1 = rms(&|i| f0[i] / scale[i]);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += h0 * f0[i];
        }
        let f1 = f(&y1);
        let d2 = rms(&|i| (f1[i] - f0[i]) / scale[i]) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1)
    }
}
