//! One-dimensional quadrature, nodal Lagrange bases and modal test spaces.
//!
//! Everything here lives on reference intervals: quadrature rules and Lagrange
//! nodes on [0,1], modal test functions on the centered interval [-1/2, 1/2].
//! Callers working on [0,1] shift coordinates by 1/2 before evaluating test
//! functions.

use crate::{Error, Result};

/// Gauss-Legendre rule on [0,1].
#[derive(Debug, Clone)]
pub struct QuadratureRule1d {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// n-point Gauss-Legendre rule on [0,1], exact for polynomials of degree
/// <= 2n-1. Nodes and weights are tabulated to full double precision.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule1d> {
    let (points, weights): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.5], vec![1.0]),
        2 => (
            vec![0.21132486540518711775, 0.78867513459481288225],
            vec![0.5, 0.5],
        ),
        3 => (
            vec![0.11270166537925831148, 0.5, 0.88729833462074168852],
            vec![
                0.27777777777777777778,
                0.44444444444444444444,
                0.27777777777777777778,
            ],
        ),
        4 => (
            vec![
                0.069431844202973712388,
                0.3300094782075718676,
                0.6699905217924281324,
                0.93056815579702628761,
            ],
            vec![
                0.17392742256872692869,
                0.32607257743127307131,
                0.32607257743127307131,
                0.17392742256872692869,
            ],
        ),
        5 => (
            vec![
                0.046910077030668003601,
                0.23076534494715845448,
                0.5,
                0.76923465505284154552,
                0.9530899229693319964,
            ],
            vec![
                0.11846344252809454376,
                0.23931433524968323402,
                0.28444444444444444444,
                0.23931433524968323402,
                0.11846344252809454376,
            ],
        ),
        6 => (
            vec![
                0.033765242898423986094,
                0.16939530676686774317,
                0.38069040695840154568,
                0.61930959304159845432,
                0.83060469323313225683,
                0.96623475710157601391,
            ],
            vec![
                0.08566224618958517252,
                0.18038078652406930378,
                0.23395696728634552369,
                0.23395696728634552369,
                0.18038078652406930378,
                0.08566224618958517252,
            ],
        ),
        7 => (
            vec![
                0.025446043828620737737,
                0.12923440720030278007,
                0.29707742431130141655,
                0.5,
                0.70292257568869858345,
                0.87076559279969721993,
                0.97455395617137926226,
            ],
            vec![
                0.064742483084434846635,
                0.13985269574463833395,
                0.19091502525255947248,
                0.20897959183673469388,
                0.19091502525255947248,
                0.13985269574463833395,
                0.064742483084434846635,
            ],
        ),
        8 => (
            vec![
                0.019855071751231884158,
                0.1016667612931866302,
                0.23723379504183550709,
                0.40828267875217509753,
                0.59171732124782490247,
                0.76276620495816449291,
                0.8983332387068133698,
                0.98014492824876811584,
            ],
            vec![
                0.050614268145188129576,
                0.11119051722668723527,
                0.15685332293894364367,
                0.18134189168918099148,
                0.18134189168918099148,
                0.15685332293894364367,
                0.11119051722668723527,
                0.050614268145188129576,
            ],
        ),
        9 => (
            vec![
                0.015919880246186955082,
                0.08198444633668210285,
                0.19331428364970480135,
                0.33787328829809553548,
                0.5,
                0.66212671170190446452,
                0.80668571635029519865,
                0.91801555366331789715,
                0.98408011975381304492,
            ],
            vec![
                0.040637194180787205986,
                0.090324080347428702029,
                0.13030534820146773116,
                0.15617353852000142003,
                0.16511967750062988158,
                0.15617353852000142003,
                0.13030534820146773116,
                0.090324080347428702029,
                0.040637194180787205986,
            ],
        ),
        10 => (
            vec![
                0.013046735741414139961,
                0.067468316655507744634,
                0.16029521585048779688,
                0.2833023029353764046,
                0.42556283050918439456,
                0.57443716949081560544,
                0.7166976970646235954,
                0.83970478414951220312,
                0.93253168334449225537,
                0.98695326425858586004,
            ],
            vec![
                0.033335672154344068797,
                0.074725674575290296573,
                0.109543181257991022,
                0.13463335965499817755,
                0.14776211235737643509,
                0.14776211235737643509,
                0.13463335965499817755,
                0.109543181257991022,
                0.074725674575290296573,
                0.033335672154344068797,
            ],
        ),
        _ => return Err(Error::UnsupportedQuadrature(n)),
    };
    Ok(QuadratureRule1d { points, weights })
}

/// Nodal Lagrange basis on distinct nodes in [0,1].
#[derive(Debug, Clone)]
pub struct LagrangeBasis1d {
    pub nodes: Vec<f64>,
}

impl LagrangeBasis1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        for w in nodes.windows(2) {
            assert!(w[0] < w[1], "nodes must be strictly increasing");
        }
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Value of the i-th cardinal polynomial at x.
    pub fn eval(&self, i: usize, x: f64) -> f64 {
        assert!(i < self.nodes.len(), "basis index out of range");
        let xi = self.nodes[i];
        let mut p = 1.0;
        for (j, &xj) in self.nodes.iter().enumerate() {
            if j != i {
                p *= (x - xj) / (xi - xj);
            }
        }
        p
    }

    /// Derivative of the i-th cardinal polynomial at x.
    pub fn deriv(&self, i: usize, x: f64) -> f64 {
        assert!(i < self.nodes.len(), "basis index out of range");
        let xi = self.nodes[i];
        let mut sum = 0.0;
        for (m, &xm) in self.nodes.iter().enumerate() {
            if m == i {
                continue;
            }
            let mut p = 1.0 / (xi - xm);
            for (j, &xj) in self.nodes.iter().enumerate() {
                if j != i && j != m {
                    p *= (x - xj) / (xi - xj);
                }
            }
            sum += p;
        }
        sum
    }

    /// Values of all cardinal polynomials at x.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.eval(i, x)).collect()
    }

    pub fn deriv_all(&self, x: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.deriv(i, x)).collect()
    }
}

/// Evaluate the m-th modal polynomial at centered coordinate s in [-1/2, 1/2].
///
/// The modal family is {1, s, s^2 - 1/12}; every member except the first has
/// zero mean on the interval.
#[inline]
pub fn modal(m: usize, s: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => s,
        2 => s * s - 1.0 / 12.0,
        _ => panic!("modal index {m} out of range"),
    }
}

/// Derivative of the m-th modal polynomial.
#[inline]
pub fn modal_deriv(m: usize, s: f64) -> f64 {
    match m {
        0 => 0.0,
        1 => 1.0,
        2 => 2.0 * s,
        _ => panic!("modal index {m} out of range"),
    }
}

/// Which test space is being requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestSpaceKind {
    /// P_k on a face (one modal index per member).
    Face,
    /// The x-derivative image of Q_{k,k}: degree <= k-1 in xi, <= k in eta.
    CellDx,
    /// The y-derivative image of Q_{k,k}: degree <= k in xi, <= k-1 in eta.
    CellDy,
}

/// Modal test space on the centered reference square.
///
/// Cell members are tensor products `modal(a, xi) * modal(b, eta)`; the `(a, b)`
/// pairs follow the span ordering used by the mass-matrix blocks:
/// for `CellDx` at k = 2 this is {1, xi, eta, xi*eta, eta^2 - 1/12,
/// xi*(eta^2 - 1/12)}.
#[derive(Debug, Clone)]
pub struct TestSpace {
    pub kind: TestSpaceKind,
    pub k: usize,
    /// Modal index pairs (a, b); faces use b = 0 and are one-dimensional.
    pub members: Vec<(usize, usize)>,
}

impl TestSpace {
    pub fn dim(&self) -> usize {
        self.members.len()
    }

    /// Value of member m at centered (xi, eta).
    #[inline]
    pub fn eval(&self, m: usize, xi: f64, eta: f64) -> f64 {
        let (a, b) = self.members[m];
        modal(a, xi) * modal(b, eta)
    }

    #[inline]
    pub fn deriv_xi(&self, m: usize, xi: f64, eta: f64) -> f64 {
        let (a, b) = self.members[m];
        modal_deriv(a, xi) * modal(b, eta)
    }

    #[inline]
    pub fn deriv_eta(&self, m: usize, xi: f64, eta: f64) -> f64 {
        let (a, b) = self.members[m];
        modal(a, xi) * modal_deriv(b, eta)
    }
}

/// Build a test space for degree k in {0, 1, 2}.
pub fn test_space(kind: TestSpaceKind, k: usize) -> Result<TestSpace> {
    if k > 2 {
        return Err(Error::UnsupportedDegree(k));
    }
    let members: Vec<(usize, usize)> = match kind {
        TestSpaceKind::Face => (0..=k).map(|a| (a, 0)).collect(),
        TestSpaceKind::CellDx => match k {
            0 => vec![],
            // span{1, eta}
            1 => vec![(0, 0), (0, 1)],
            // span{1, xi, eta, xi*eta, eta^2 - 1/12, xi*(eta^2 - 1/12)}
            2 => vec![(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)],
            _ => unreachable!(),
        },
        TestSpaceKind::CellDy => match k {
            0 => vec![],
            // span{1, xi}
            1 => vec![(0, 0), (1, 0)],
            // span{1, xi, eta, xi*eta, xi^2 - 1/12, (xi^2 - 1/12)*eta}
            2 => vec![(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (2, 1)],
            _ => unreachable!(),
        },
    };
    Ok(TestSpace { kind, k, members })
}

/// Tensor modal basis of Q_{k,k} on the centered reference square, used when
/// testing divergence moments.
pub fn qkk_basis(k: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity((k + 1) * (k + 1));
    for b in 0..=k {
        for a in 0..=k {
            v.push((a, b));
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_exactness() {
        // n-point rule reproduces int_0^1 x^d dx = 1/(d+1) for d <= 2n-1
        for n in 1..=5 {
            let rule = gauss_legendre(n).unwrap();
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-14);
            for d in 0..=(2 * n - 1) {
                let approx: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| w * x.powi(d as i32))
                    .sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert!(
                    (approx - exact).abs() < 1e-13,
                    "n={n} d={d}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn quadrature_points_increasing_and_in_range() {
        for n in 1..=10 {
            let rule = gauss_legendre(n).unwrap();
            assert_eq!(rule.points.len(), n);
            for w in rule.points.windows(2) {
                assert!(w[0] < w[1]);
            }
            assert!(rule.points[0] > 0.0 && rule.points[n - 1] < 1.0);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn midpoint_rule_for_n1() {
        let rule = gauss_legendre(1).unwrap();
        assert_eq!(rule.points, vec![0.5]);
        assert_eq!(rule.weights, vec![1.0]);
    }

    #[test]
    fn two_point_rule_values() {
        let rule = gauss_legendre(2).unwrap();
        let lo = 0.5 * (1.0 - 1.0 / 3.0_f64.sqrt());
        let hi = 0.5 * (1.0 + 1.0 / 3.0_f64.sqrt());
        assert!((rule.points[0] - lo).abs() < 1e-15);
        assert!((rule.points[1] - hi).abs() < 1e-15);
    }

    #[test]
    fn three_point_rule_integrates_degree_five() {
        let rule = gauss_legendre(3).unwrap();
        let approx: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * x.powi(5))
            .sum();
        assert!((approx - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn unsupported_order_rejected() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(11).is_err());
    }

    #[test]
    fn lagrange_cardinality_and_partition_of_unity() {
        let cases = vec![
            LagrangeBasis1d::new(gauss_legendre(2).unwrap().points),
            LagrangeBasis1d::new(gauss_legendre(3).unwrap().points),
            LagrangeBasis1d::new(vec![0.0, 0.5, 1.0]),
            LagrangeBasis1d::new(vec![0.0, 0.2113248654051871, 0.7886751345948129, 1.0]),
        ];
        for basis in &cases {
            for i in 0..basis.len() {
                for (j, &xj) in basis.nodes.iter().enumerate() {
                    let v = basis.eval(i, xj);
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-13);
                }
            }
            // partition of unity at scattered points
            for p in 0..50 {
                let x = (p as f64 + 0.5) / 50.0;
                let s: f64 = (0..basis.len()).map(|i| basis.eval(i, x)).sum();
                assert!((s - 1.0).abs() < 1e-13);
                let ds: f64 = (0..basis.len()).map(|i| basis.deriv(i, x)).sum();
                assert!(ds.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lagrange_derivative_of_quadratic() {
        // interpolate x^2 on three nodes; derivative at 0.5 must be 1
        let basis = LagrangeBasis1d::new(vec![0.0, 0.5, 1.0]);
        let coef = [0.0, 0.25, 1.0];
        let d: f64 = (0..3).map(|i| coef[i] * basis.deriv(i, 0.5)).sum();
        assert!((d - 1.0).abs() < 1e-14);
    }

    #[test]
    fn face_test_spaces_match_spans() {
        let t0 = test_space(TestSpaceKind::Face, 0).unwrap();
        assert_eq!(t0.members, vec![(0, 0)]);
        let t2 = test_space(TestSpaceKind::Face, 2).unwrap();
        assert_eq!(t2.dim(), 3);
        // third member is s^2 - 1/12
        assert!((t2.eval(2, 0.5, 0.0) - (0.25 - 1.0 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn cell_test_space_dims() {
        for k in 0..=2 {
            let dx = test_space(TestSpaceKind::CellDx, k).unwrap();
            let dy = test_space(TestSpaceKind::CellDy, k).unwrap();
            assert_eq!(dx.dim(), k * (k + 1));
            assert_eq!(dy.dim(), k * (k + 1));
        }
        let dx1 = test_space(TestSpaceKind::CellDx, 1).unwrap();
        // span{1, eta}: member 1 is eta
        assert!((dx1.eval(1, 0.3, -0.2) - (-0.2)).abs() < 1e-15);
        assert!(test_space(TestSpaceKind::Face, 3).is_err());
    }

    #[test]
    fn nonconstant_test_functions_have_zero_mean() {
        // integrate each member over the centered reference domain
        let rule = gauss_legendre(4).unwrap();
        for k in 0..=2usize {
            for kind in [
                TestSpaceKind::Face,
                TestSpaceKind::CellDx,
                TestSpaceKind::CellDy,
            ] {
                let space = test_space(kind, k).unwrap();
                for m in 0..space.dim() {
                    let mut integral = 0.0;
                    for (&x, &wx) in rule.points.iter().zip(&rule.weights) {
                        match kind {
                            TestSpaceKind::Face => {
                                integral += wx * space.eval(m, x - 0.5, 0.0);
                            }
                            _ => {
                                for (&y, &wy) in rule.points.iter().zip(&rule.weights) {
                                    integral += wx * wy * space.eval(m, x - 0.5, y - 0.5);
                                }
                            }
                        }
                    }
                    if kind == TestSpaceKind::Face && m > 0 {
                        assert!(integral.abs() < 1e-13, "face member {m} mean {integral}");
                    }
                    if kind != TestSpaceKind::Face && m > 0 {
                        assert!(integral.abs() < 1e-13, "cell member {m} mean {integral}");
                    }
                    if m == 0 {
                        assert!((integral - 1.0).abs() < 1e-13);
                    }
                }
            }
        }
    }
}
