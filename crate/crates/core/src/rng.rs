//! Counter-based random streams for reproducible simulation.
//!
//! A stream is identified by `(seed, stream_id)`. Its key is
//! `mix(seed ^ mix(stream_id + GOLDEN))`, and draw `i` (0-based) is
//! `mix(key + (i + 1) * GOLDEN)`, where `mix` is the SplitMix64 finaliser
//! and `GOLDEN = 0x9E3779B97F4A7C15`. Any draw of any stream can therefore be
//! computed without touching other streams.
//!
//! Uniforms use the top 53 bits: `u = ((x >> 11) + 0.5) / 2^53`, which lies
//! strictly inside (0, 1). Normal variates are `Φ⁻¹(u)` computed with
//! Wichura's AS241 (PPND16) algorithm, one uniform per normal.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        CounterRng {
            key: mix64(seed ^ mix64(stream.wrapping_add(GOLDEN))),
            counter: 0,
        }
    }

    /// Draw at an absolute position without advancing the stream.
    pub fn at(&self, index: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)),
        )
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn next_normal(&mut self) -> f64 {
        normal_quantile(self.next_open01())
    }

    pub fn position(&self) -> u64 {
        self.counter
    }
}

/// Stream id of simulation cell `(n, replicate)`.
pub fn cell_stream(n: usize, replicate: usize) -> u64 {
    ((n as u64) << 32) | replicate as u64
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Standard normal quantile, Wichura (1988) AS241 PPND16; about 1e-16 relative accuracy.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_5,
        1.331_416_678_917_843_8e2,
        1.971_590_950_306_551_3e3,
        1.373_169_376_550_946e4,
        4.592_195_393_154_987e4,
        6.726_577_092_700_87e4,
        3.343_057_558_358_813e4,
        2.509_080_928_730_122_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091e1,
        6.871_870_074_920_579e2,
        5.394_196_021_424_751e3,
        2.121_379_430_158_659_7e4,
        3.930_789_580_009_271e4,
        2.872_908_573_572_194_3e4,
        5.226_495_278_852_545e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_546,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        2.417_807_251_774_506e-1,
        2.272_384_498_926_918_4e-2,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        6.897_673_349_851e-1,
        1.481_039_764_274_800_8e-1,
        1.519_866_656_361_645_7e-2,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_9e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        2.965_605_718_285_048_7e-1,
        2.653_218_952_657_612_4e-2,
        1.242_660_947_388_078_4e-3,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_88e-1,
        1.369_298_809_227_358e-1,
        1.487_536_129_085_061_5e-2,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_939_8e-15,
    ];

    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn quantile_matches_reference_points() {
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(0.025) + 1.959_963_984_540_054).abs() < 1e-14);
        assert!((normal_quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
        assert!((normal_quantile(1e-100) + 21.273_453_560_965_322).abs() < 1e-11);
        assert!(normal_quantile(0.0).is_infinite());
        assert!(normal_quantile(1.5).is_nan());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let nd = Normal::standard();
        for &p in &[
            1e-300,
            1e-20,
            1e-5,
            0.01,
            0.2,
            0.4,
            0.6,
            0.9,
            0.999,
            1.0 - 1e-12,
        ] {
            let z = normal_quantile(p);
            let back = nd.cdf(z);
            assert!(
                ((back - p) / p).abs() < 1e-9,
                "p = {p}, z = {z}, back = {back}"
            );
        }
    }

    #[test]
    fn streams_are_reproducible_and_independent_of_order() {
        let mut a = CounterRng::new(42, 7);
        let first: Vec<u64> = (0..5).map(|_| a.next_u64()).collect();
        let b = CounterRng::new(42, 7);
        assert_eq!(b.at(3), first[3]);
        assert_ne!(CounterRng::new(42, 8).at(0), first[0]);
        assert_ne!(CounterRng::new(43, 7).at(0), first[0]);
        assert_eq!(a.position(), 5);
    }

    #[test]
    fn uniforms_open_interval_and_normals_moments() {
        let mut r = CounterRng::new(1, 0);
        let n = 200_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let u = r.next_open01();
            assert!(u > 0.0 && u < 1.0);
        }
        for _ in 0..n {
            let z = r.next_normal();
            s += z;
            s2 += z * z;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }
}
