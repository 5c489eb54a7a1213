use std::ops::Mul;

/// 4x4 homogeneous transform over row vectors `[y, x, t, 1]`.
///
/// Points are transformed by right-multiplication, `v' = v * M`, so the
/// translation lives in the last row and composition reads left to right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[f64; 4]; 4]);

impl Mat4 {
    pub const IDENTITY: Mat4 = Mat4([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    /// `v * self` for a row vector `v`.
    #[inline]
    pub fn apply(&self, v: [f64; 4]) -> [f64; 4] {
        let m = &self.0;
        let mut out = [0.0; 4];
        for (j, o) in out.iter_mut().enumerate() {
            *o = v[0] * m[0][j] + v[1] * m[1][j] + v[2] * m[2][j] + v[3] * m[3][j];
        }
        out
    }

    /// Applies the affine part to a point `(y, x, t)`. Assumes the last column
    /// is `(0, 0, 0, 1)`.
    #[inline]
    pub fn apply_point(&self, y: f64, x: f64, t: f64) -> [f64; 3] {
        let m = &self.0;
        [
            y * m[0][0] + x * m[1][0] + t * m[2][0] + m[3][0],
            y * m[0][1] + x * m[1][1] + t * m[2][1] + m[3][1],
            y * m[0][2] + x * m[1][2] + t * m[2][2] + m[3][2],
        ]
    }

    pub fn transpose(&self) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[j][i];
            }
        }
        Mat4(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        // Laplace expansion over complementary 2x2 minors of rows (0,1) and (2,3).
        let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
        let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
        let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
        let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
        let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
        let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];

        let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
        let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
        let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
        let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
        let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
        let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];

        s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    }

    /// True when the fourth column is exactly `(0, 0, 0, 1)`.
    pub fn is_affine(&self) -> bool {
        let m = &self.0;
        m[0][3] == 0.0 && m[1][3] == 0.0 && m[2][3] == 0.0 && m[3][3] == 1.0
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }

    pub fn abs(&self) -> Mat4 {
        let mut out = self.0;
        for row in out.iter_mut() {
            for v in row.iter_mut() {
                *v = v.abs();
            }
        }
        Mat4(out)
    }
}

impl Default for Mat4 {
    fn default() -> Self {
        Mat4::IDENTITY
    }
}

impl Mul for Mat4 {
    type Output = Mat4;

    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat4(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Mat4 {
        Mat4([
            [2.0, -1.0, 0.5, 0.0],
            [3.0, 4.0, 1.0, 0.0],
            [0.0, 7.0, -2.0, 0.0],
            [1.0, 2.0, 3.0, 1.0],
        ])
    }

    // Cofactor expansion along the first row, independent of `determinant`.
    fn det3(m: [[f64; 3]; 3]) -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn det4_cofactor(m: &Mat4) -> f64 {
        (0..4)
            .map(|c| {
                let mut minor = [[0.0; 3]; 3];
                for r in 1..4 {
                    let mut k = 0;
                    for cc in 0..4 {
                        if cc != c {
                            minor[r - 1][k] = m.0[r][cc];
                            k += 1;
                        }
                    }
                }
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * m.0[0][c] * det3(minor)
            })
            .sum()
    }

    #[test]
    fn identity_is_neutral() {
        let a = sample();
        assert_eq!(a * Mat4::IDENTITY, a);
        assert_eq!(Mat4::IDENTITY * a, a);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let a = sample();
        assert!((a.determinant() - det4_cofactor(&a)).abs() < 1e-12);
        let full = Mat4([
            [1.0, 2.0, 3.0, 4.0],
            [5.0, 6.0, 7.0, 8.5],
            [2.0, 6.0, 4.0, 8.0],
            [3.0, 1.0, 1.0, 2.0],
        ]);
        assert!((full.determinant() - det4_cofactor(&full)).abs() < 1e-9);
    }

    #[test]
    fn apply_matches_full_product() {
        let a = sample();
        let v = [1.5, -2.0, 3.0, 1.0];
        let full = a.apply(v);
        let affine = a.apply_point(v[0], v[1], v[2]);
        assert_eq!(&full[..3], &affine[..]);
        assert_eq!(full[3], 1.0);
    }

    #[test]
    fn transpose_of_product() {
        let a = sample();
        let b = sample().transpose();
        assert_eq!((a * b).transpose(), b.transpose() * a.transpose());
    }
}
