//! Face jump and weighted-average operators between a left cell `l` and a
//! right cell `r`, with `n` the unit normal pointing from `l` into `r`.

use crate::real::{v3, Real};

/// Scalar jump `u_l n_l + u_r n_r = (u_l - u_r) n`.
#[inline]
pub fn jump_scalar<T: Real>(u_l: T, u_r: T, n: [T; 3]) -> [T; 3] {
    v3::add(v3::scale(n, u_l), v3::scale(n, -u_r))
}

/// Vector jump `v_l · n_l + v_r · n_r = (v_l - v_r) · n`.
#[inline]
pub fn jump_vector<T: Real>(v_l: [T; 3], v_r: [T; 3], n: [T; 3]) -> T {
    v3::dot(v_l, n) - v3::dot(v_r, n)
}

/// Weighted average `ω_l x_l + ω_r x_r`.
#[inline]
pub fn average<T: Real>(x_l: T, x_r: T, w_l: T, w_r: T) -> T {
    w_l * x_l + w_r * x_r
}

/// Average with swapped weights `ω_r x_l + ω_l x_r`.
#[inline]
pub fn average_star<T: Real>(x_l: T, x_r: T, w_l: T, w_r: T) -> T {
    w_r * x_l + w_l * x_r
}
