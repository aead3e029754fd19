use num_complex::Complex64;

/// Gray-coded 16-QAM. Symbol index bits `b3 b2 b1 b0` map `b3 b2` to the
/// in-phase level and `b1 b0` to the quadrature level, each through the Gray
/// sequence `00, 01, 11, 10` on levels `−3, −1, 1, 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: [Complex64; 16],
    es: f64,
}

const GRAY_LEVEL: [f64; 4] = [-3.0, -1.0, 3.0, 1.0];

impl Constellation {
    pub fn qam16(es: f64) -> Self {
        let scale = (es / 10.0).sqrt();
        let points = std::array::from_fn(|k| {
            Complex64::new(GRAY_LEVEL[k >> 2] * scale, GRAY_LEVEL[k & 3] * scale)
        });
        Self { points, es }
    }

    pub fn points(&self) -> &[Complex64; 16] {
        &self.points
    }

    pub fn es(&self) -> f64 {
        self.es
    }

    pub const BITS_PER_SYMBOL: usize = 4;

    /// Symbol for four bits, most significant first.
    pub fn map(&self, bits: &[u8]) -> Complex64 {
        let k = bits[..4].iter().fold(0usize, |k, &b| (k << 1) | (b & 1) as usize);
        self.points[k]
    }

    /// Index of the nearest point.
    pub fn decide(&self, z: Complex64) -> usize {
        (0..16)
            .min_by(|&a, &b| (z - self.points[a]).norm_sqr().total_cmp(&(z - self.points[b]).norm_sqr()))
            .expect("16 points")
    }

    pub fn bits_of(k: usize) -> [u8; 4] {
        std::array::from_fn(|i| ((k >> (3 - i)) & 1) as u8)
    }
}

/// Hard-decision demapping to bits, four per symbol.
pub fn demap(s: &[Complex64], c: &Constellation) -> Vec<u8> {
    s.iter().flat_map(|&z| Constellation::bits_of(c.decide(z))).collect()
}
