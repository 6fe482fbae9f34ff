/// Plane rotation `(c, s, r)` with `c·a + s·b = r`, `−s·a + c·b = 0` and
/// `r ≥ 0`. The degenerate input `(0, 0)` maps to the identity rotation.
pub fn givens_rotation(a: f64, b: f64) -> (f64, f64, f64) {
    let r = a.hypot(b);
    if r == 0.0 {
        return (1.0, 0.0, 0.0);
    }
    (a / r, b / r, r)
}
