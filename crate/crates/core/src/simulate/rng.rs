//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, purpose, step, block, particle)`
//! through the Philox4x32-10 bijection, so any particle's noise can be
//! regenerated on demand and results never depend on thread scheduling.
//! Gaussians come from the inverse normal CDF (Wichura's AS241, PPND16),
//! which is portable and needs exactly one uniform per normal.

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Philox4x32 with ten rounds.
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let p0 = u64::from(PHILOX_M0) * u64::from(c[0]);
        let p1 = u64::from(PHILOX_M1) * u64::from(c[2]);
        let (hi0, lo0) = ((p0 >> 32) as u32, p0 as u32);
        let (hi1, lo1) = ((p1 >> 32) as u32, p1 as u32);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Independent stream families drawn from one user seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Increments = 1,
    Bridge = 2,
    ColeHopf = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed normal generator for one `(seed, purpose)` pair.
#[derive(Debug, Clone, Copy)]
pub struct NormalStream {
    key: [u32; 2],
}

impl NormalStream {
    pub fn new(seed: u64, purpose: Purpose) -> Self {
        let k = splitmix64(seed ^ splitmix64(purpose as u64));
        NormalStream {
            key: [k as u32, (k >> 32) as u32],
        }
    }

    /// Fills `out` with the standard normals addressed by `(step, particle)`.
    pub fn fill(&self, step: u64, particle: u64, out: &mut [f64]) {
        let mut block = 0u32;
        for pair in out.chunks_mut(2) {
            let ctr = [step as u32, block, particle as u32, (particle >> 32) as u32];
            let w = philox4x32_10(ctr, self.key);
            let u0 = (u64::from(w[0]) << 32) | u64::from(w[1]);
            let u1 = (u64::from(w[2]) << 32) | u64::from(w[3]);
            pair[0] = inverse_normal_cdf(to_unit_open(u0));
            if pair.len() > 1 {
                pair[1] = inverse_normal_cdf(to_unit_open(u1));
            }
            block += 1;
        }
    }

    /// Uniform on (0, 1) addressed the same way, using the high word pair.
    pub fn uniform(&self, step: u64, particle: u64, block: u32) -> f64 {
        let ctr = [step as u32, block, particle as u32, (particle >> 32) as u32];
        let w = philox4x32_10(ctr, self.key);
        to_unit_open((u64::from(w[0]) << 32) | u64::from(w[1]))
    }
}

/// Maps 64 random bits to the open interval (0, 1) on a grid of step 2^-52.
pub fn to_unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

// AS241 coefficients. Central region |q| <= 0.425.
const A: [f64; 8] = [
    3.387_132_872_796_366_608_0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const B: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083_0e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061_0e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561_0e3,
];
// Intermediate tail, r = sqrt(-log(min(p, 1-p))) <= 5.
const C: [f64; 8] = [
    1.423_437_110_749_683_577_34,
    4.630_337_846_156_545_295_90,
    5.769_497_221_460_691_405_50,
    3.647_848_324_763_204_605_04,
    1.270_458_252_452_368_382_58,
    2.417_807_251_774_506_117_70e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_40e-4,
];
const D: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87,
    1.676_384_830_183_803_849_40,
    6.897_673_349_851_000_045_50e-1,
    1.481_039_764_274_800_745_90e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946_00e-4,
    1.050_750_071_644_416_843_24e-9,
];
// Far tail, r > 5.
const E: [f64; 8] = [
    6.657_904_643_501_103_777_20,
    5.463_784_911_164_114_369_90,
    1.784_826_539_917_291_335_80,
    2.965_605_718_285_048_912_30e-1,
    2.653_218_952_657_612_309_30e-2,
    1.242_660_947_388_078_438_60e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const F: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_90e-1,
    1.369_298_809_227_358_053_10e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591_00e-4,
    1.846_318_317_510_054_681_80e-5,
    1.421_511_758_316_445_888_70e-7,
    2.044_263_103_389_939_785_64e-15,
];

fn poly(c: &[f64; 8], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Standard normal quantile for `p` in (0, 1), accurate to about 1e-16
/// relative. Returns infinities at the endpoints.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    if tail <= 0.0 {
        return if q < 0.0 { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    let r = (-tail.ln()).sqrt();
    let v = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}
