//! Upwind electric-field fluxes: the 1-D face flux and the four-state vertex
//! flux, plus the ghost-state rules that impose boundary data.
//!
//! The induction equation has a single characteristic family, the integral
//! curves of the velocity, so upwinding selects states by the sign of the
//! normal velocity. At a vertex four states meet; the flux formula is the
//! four-state average with sign-weighted jump corrections, which reduces to
//! plain upwind selection whenever the normal components are continuous.

/// E = v_y B_x - v_x B_y.
#[inline]
pub fn electric_field(v: (f64, f64), b: (f64, f64)) -> f64 {
    v.1 * b.0 - v.0 * b.1
}

/// Upwind flux across a face from the full left/right states, selected by
/// the sign of the velocity component along the face normal. A zero normal
/// velocity averages the two sides, which matches the sign-weighted form of
/// the flux and is continuous in the velocity.
#[inline]
pub fn upwind(e_minus: f64, e_plus: f64, v_normal: f64) -> f64 {
    0.5 * (e_minus + e_plus) - 0.5 * sign(v_normal) * (e_plus - e_minus)
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Flux across a vertical face (+x normal): the normal component `bx` is
/// single valued, the tangential component is upwinded by the sign of v_x.
#[inline]
pub fn vertical_face_flux(v: (f64, f64), bx: f64, by_left: f64, by_right: f64) -> f64 {
    upwind(
        electric_field(v, (bx, by_left)),
        electric_field(v, (bx, by_right)),
        v.0,
    )
}

/// Flux across a horizontal face (+y normal): `by` is single valued, the
/// tangential component is upwinded by the sign of v_y.
#[inline]
pub fn horizontal_face_flux(v: (f64, f64), by: f64, bx_below: f64, bx_above: f64) -> f64 {
    upwind(
        electric_field(v, (bx_below, by)),
        electric_field(v, (bx_above, by)),
        v.1,
    )
}

/// The four states meeting at a vertex, one per quadrant cell.
///
/// In the mesh interior the normal components are continuous, so
/// `up_left.0 == up_right.0` (shared B_x of the face above) and
/// `up_left.1 == down_left.1` (shared B_y of the face to the left); at
/// inflow boundary vertices the ghost quadrants may break those identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexStates {
    pub down_left: (f64, f64),
    pub down_right: (f64, f64),
    pub up_left: (f64, f64),
    pub up_right: (f64, f64),
}

/// Four-state vertex flux.
pub fn vertex_flux(v: (f64, f64), s: VertexStates) -> f64 {
    let (vx, vy) = v;
    let bx_u = 0.5 * (s.up_left.0 + s.up_right.0);
    let bx_d = 0.5 * (s.down_left.0 + s.down_right.0);
    let by_l = 0.5 * (s.up_left.1 + s.down_left.1);
    let by_r = 0.5 * (s.up_right.1 + s.down_right.1);
    0.5 * vy * (bx_u + bx_d) - 0.5 * vx * (by_l + by_r) - 0.5 * vy.abs() * (bx_u - bx_d)
        + 0.5 * vx.abs() * (by_r - by_l)
}

/// Vertex flux from the four continuous trace values (interior form).
pub fn vertex_flux_compact(
    v: (f64, f64),
    bx_up: f64,
    bx_down: f64,
    by_left: f64,
    by_right: f64,
) -> f64 {
    let (vx, vy) = v;
    0.5 * vy * (bx_up + bx_down)
        - 0.5 * vx * (by_left + by_right)
        - 0.5 * vy.abs() * (bx_up - bx_down)
        + 0.5 * vx.abs() * (by_right - by_left)
}

/// Case-wise upwind selection among the four corner states; ties fall back
/// to the sign-weighted form.
pub fn vertex_flux_cases(v: (f64, f64), s: VertexStates) -> f64 {
    let (vx, vy) = v;
    if vx > 0.0 && vy > 0.0 {
        electric_field(v, s.down_left)
    } else if vx > 0.0 && vy < 0.0 {
        electric_field(v, s.up_left)
    } else if vx < 0.0 && vy > 0.0 {
        electric_field(v, s.down_right)
    } else if vx < 0.0 && vy < 0.0 {
        electric_field(v, s.up_right)
    } else {
        vertex_flux(v, s)
    }
}

/// Which side of the domain a ghost quadrant falls off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundarySide {
    Left,
    Right,
    Bottom,
    Top,
}

impl BoundarySide {
    /// Inflow when the velocity points into the domain across this side.
    pub fn is_inflow(&self, v: (f64, f64)) -> bool {
        match self {
            BoundarySide::Left => v.0 > 0.0,
            BoundarySide::Right => v.0 < 0.0,
            BoundarySide::Bottom => v.1 > 0.0,
            BoundarySide::Top => v.1 < 0.0,
        }
    }
}

/// Complete the four vertex states at a boundary vertex.
///
/// `interior` carries the states of the existing quadrants (`None` where the
/// quadrant lies outside the domain). Missing quadrants are filled with the
/// prescribed data `b_star` when their side is inflow, and mirrored from the
/// neighboring interior quadrant when it is outflow, matching the
/// interior-state flux at outflow.
pub fn complete_vertex_states(
    interior: [Option<(f64, f64)>; 4], // down_left, down_right, up_left, up_right
    v: (f64, f64),
    b_star: (f64, f64),
    on_left: bool,
    on_right: bool,
    on_bottom: bool,
    on_top: bool,
) -> VertexStates {
    let x_outside = |q: usize| (on_left && (q == 0 || q == 2)) || (on_right && (q == 1 || q == 3));
    let y_outside = |q: usize| (on_bottom && q < 2) || (on_top && q >= 2);
    let x_side = if on_left {
        BoundarySide::Left
    } else {
        BoundarySide::Right
    };
    let y_side = if on_bottom {
        BoundarySide::Bottom
    } else {
        BoundarySide::Top
    };
    let mirror_x = [1usize, 0, 3, 2];
    let mirror_y = [2usize, 3, 0, 1];

    let mut states = interior;
    // fill quadrants missing in one direction first, then the diagonal
    for pass in 0..2 {
        for q in 0..4 {
            if states[q].is_some() {
                continue;
            }
            let xo = x_outside(q);
            let yo = y_outside(q);
            if pass == 0 && xo && yo {
                continue;
            }
            if (xo && x_side.is_inflow(v)) || (yo && y_side.is_inflow(v)) {
                states[q] = Some(b_star);
                continue;
            }
            let mut m = q;
            if xo {
                m = mirror_x[m];
            }
            if yo {
                m = mirror_y[m];
            }
            states[q] = states[m];
        }
    }
    VertexStates {
        down_left: states[0].expect("down-left state"),
        down_right: states[1].expect("down-right state"),
        up_left: states[2].expect("up-left state"),
        up_right: states[3].expect("up-right state"),
    }
}
