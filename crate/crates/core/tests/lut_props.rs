use ggm_core::bounds::{BoundTable, DEFAULT_KNOTS};
use ggm_core::lut::{
    build_lut, decode, encode, exp_golomb_len, stream_estimated_bits, Bitstream, LutConfig, LutGrid,
    ParamStream, TOTAL_FREQ,
};
use ggm_core::model::QuantizedPmf;
use ggm_core::{Error, GgmParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

fn bound() -> &'static BoundTable {
    static B: OnceLock<BoundTable> = OnceLock::new();
    B.get_or_init(|| BoundTable::build(DEFAULT_KNOTS).unwrap())
}

fn grids() -> &'static [LutGrid] {
    static G: OnceLock<Vec<LutGrid>> = OnceLock::new();
    G.get_or_init(|| {
        vec![
            build_lut(&LutConfig::new(1, 8), None).unwrap(),
            build_lut(&LutConfig::new(3, 16), Some(bound())).unwrap(),
            build_lut(&LutConfig::default(), Some(bound())).unwrap(),
        ]
    })
}

fn default_grid() -> &'static LutGrid {
    &grids()[2]
}

fn random_params(rng: &mut impl Rng, n: usize) -> Vec<GgmParams> {
    (0..n)
        .map(|_| {
            let beta = rng.random_range(0.5..3.0);
            let alpha = rng.random_range(0.05f64.ln()..30f64.ln()).exp();
            GgmParams::new(rng.random_range(-4.0..4.0), alpha, beta).unwrap()
        })
        .collect()
}

/// Residuals drawn from each symbol's own distribution.
fn draw(params: &[GgmParams], rng: &mut ChaCha8Rng) -> Vec<i64> {
    params
        .iter()
        .map(|p| {
            let centered = p.with_mu(0.0).unwrap();
            ggm_core::model::sample(&centered, 1, rng)[0].round() as i64
        })
        .collect()
}

/// Exact expected code length of zero-centered residuals of `truth` under
/// the table `truth` quantizes to.
fn expected_bits(grid: &LutGrid, truth: &GgmParams) -> f64 {
    let (b, a) = grid.quantize_params(truth);
    let table = grid.table(b, a);
    let pmf = QuantizedPmf::zero_center(truth);
    pmf.probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(j, &p)| {
            let s = pmf.offset + j as i64;
            let slot = table.slot_of(s).unwrap_or(table.escape_slot());
            let mut bits = -table.prob(slot).log2();
            if slot == table.escape_slot() {
                bits += 1.0 + exp_golomb_len(s.unsigned_abs() - table.half_width() as u64 - 1) as f64;
            }
            p * bits
        })
        .sum()
}

fn average_expected_bits(grid: &LutGrid, truths: &[GgmParams]) -> f64 {
    truths.iter().map(|t| expected_bits(grid, t)).sum::<f64>() / truths.len() as f64
}

fn symbol() -> impl Strategy<Value = i64> {
    prop_oneof![
        8 => -6i64..=6,
        2 => -300i64..=300,
        1 => any::<i64>(),
        1 => prop_oneof![Just(i64::MIN), Just(i64::MAX), Just(1_000_000i64), Just(-1_000_000i64)],
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn arbitrary_symbols_round_trip(
        which in 0usize..3,
        items in prop::collection::vec((symbol(), any::<u16>(), any::<u16>()), 0..300),
    ) {
        let grid = &grids()[which];
        let (n, m) = (grid.beta_samples().len(), grid.alpha_samples().len());
        let symbols: Vec<i64> = items.iter().map(|t| t.0).collect();
        let ps = ParamStream {
            indices: items.iter().map(|t| (t.1 % n as u16, t.2 % m as u16)).collect(),
            mus: vec![],
        };
        let bits = encode(&symbols, &ps, grid).unwrap();
        let parsed = Bitstream::from_bytes(&bits.to_bytes()).unwrap();
        prop_assert_eq!(&parsed, &bits);
        prop_assert_eq!(decode(&parsed, &ps, grid).unwrap(), symbols);
    }
}

#[test]
fn coded_length_tracks_estimate() {
    let grid = default_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = random_params(&mut rng, 100_000);
    let symbols = draw(&params, &mut rng);
    let ps = ParamStream::quantize(&params, grid);
    let bits = encode(&symbols, &ps, grid).unwrap();
    let est = stream_estimated_bits(&symbols, &ps, grid).unwrap();
    let actual = 8.0 * bits.len_bytes() as f64;
    assert!(actual <= est * 1.01 + 64.0 * 8.0, "{actual} vs {est}");
    assert_eq!(decode(&bits, &ps, grid).unwrap(), symbols);
}

#[test]
fn output_is_identical_across_thread_counts() {
    let build = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| build_lut(&LutConfig::default(), Some(bound())).unwrap())
    };
    let (one, many) = (build(1), build(8));
    assert_eq!(one.to_bytes(), many.to_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = random_params(&mut rng, 20_000);
    let symbols = draw(&params, &mut rng);
    let a = encode(&symbols, &ParamStream::quantize(&params, &one), &one).unwrap();
    let b = encode(&symbols, &ParamStream::quantize(&params, &many), &many).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
}

#[test]
fn default_grid_size() {
    let grid = default_grid();
    assert_eq!(grid.table_count(), 3200);
    let bytes = grid.to_bytes().len();
    // Dense layout: 256 uint16 entries per table (1.5625 MiB) plus a
    // four-byte table header and the 42-byte file header.
    assert!(bytes <= 3200 * (256 * 2 + 4) + 42, "{bytes}");
    assert_eq!(3200 * 256 * 2, 1_638_400);
    let back = LutGrid::from_bytes(&grid.to_bytes()).unwrap();
    assert_eq!(&back, grid);
}

#[test]
fn every_slot_has_a_count() {
    for grid in grids() {
        for t in grid.tables() {
            assert_eq!(*t.cum().last().unwrap(), TOTAL_FREQ);
            assert!(t.cum().windows(2).all(|w| w[1] > w[0]));
            assert!(t.slots() <= 256);
        }
    }
}

#[test]
fn certain_symbol_costs_the_precision_floor() {
    let grid = build_lut(&LutConfig::single_beta(2.0, 2), None).unwrap();
    let table = grid.table(0, 0);
    assert_eq!(table.slots(), 2);
    let n = 1000;
    let ps = ParamStream { indices: vec![(0, 0); n], mus: vec![] };
    let est = stream_estimated_bits(&vec![0; n], &ps, &grid).unwrap();
    let floor = -((TOTAL_FREQ - 1) as f64 / TOTAL_FREQ as f64).log2();
    assert!((est / n as f64 - floor).abs() < 1e-15);
    assert!(encode(&vec![0; n], &ps, &grid).unwrap().payload.len() <= 6);
}

#[test]
fn nested_refinement_never_costs_more() {
    // 39 shape samples on [0.5, 3] contain all 20 of the default grid.
    let coarse = default_grid();
    let fine = build_lut(&LutConfig::new(39, 160), Some(bound())).unwrap();
    for b in coarse.beta_samples() {
        assert!(fine.beta_samples().iter().any(|f| (f - b).abs() < 1e-12));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let truths: Vec<GgmParams> = (0..400)
        .map(|_| {
            let b = coarse.beta_samples()[rng.random_range(0..20)];
            let a = coarse.alpha_samples()[rng.random_range(0..160)];
            GgmParams::new(0.0, a, b).unwrap()
        })
        .collect();
    let symbols = draw(&truths, &mut rng);
    let est = |g: &LutGrid| stream_estimated_bits(&symbols, &ParamStream::quantize(&truths, g), g).unwrap();
    assert!(est(&fine) <= est(coarse));
    assert!(average_expected_bits(&fine, &truths) <= average_expected_bits(coarse, &truths) + 1e-12);
}

#[test]
fn more_tables_never_cost_more() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let truths: Vec<GgmParams> = random_params(&mut rng, 1000)
        .into_iter()
        .map(|p| p.with_mu(0.0).unwrap())
        .collect();
    let layouts = [(5, 20), (10, 20), (10, 40), (20, 40), (20, 80), (20, 160)];
    let costs: Vec<f64> = layouts
        .iter()
        .map(|&(n, m)| {
            let g = build_lut(&LutConfig::new(n, m), Some(bound())).unwrap();
            assert_eq!(g.table_count(), n * m);
            average_expected_bits(&g, &truths)
        })
        .collect();
    assert!(costs.windows(2).all(|w| w[1] <= w[0]), "{costs:?}");
}

#[test]
fn empty_stream_round_trips() {
    let grid = &grids()[0];
    let ps = ParamStream::default();
    let bits = encode(&[], &ps, grid).unwrap();
    assert_eq!(bits.symbol_count, 0);
    assert_eq!(decode(&bits, &ps, grid).unwrap(), Vec::<i64>::new());
}

#[test]
fn damage_is_reported() {
    let grid = &grids()[1];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = random_params(&mut rng, 5000);
    let symbols = draw(&params, &mut rng);
    let ps = ParamStream::quantize(&params, grid);
    let bytes = encode(&symbols, &ps, grid).unwrap().to_bytes();

    for cut in [1, 10, bytes.len() / 2, bytes.len() - 1] {
        let r = Bitstream::from_bytes(&bytes[..cut]).and_then(|b| decode(&b, &ps, grid));
        assert!(matches!(r, Err(Error::Corruption(_))), "cut at {cut}: {r:?}");
    }
    let mut wrong_version = bytes.clone();
    wrong_version[4] = 9;
    assert!(matches!(Bitstream::from_bytes(&wrong_version), Err(Error::Corruption(_))));

    let other = &grids()[0];
    let ps_other = ParamStream {
        indices: vec![(0, 0); symbols.len()],
        mus: vec![],
    };
    let parsed = Bitstream::from_bytes(&bytes).unwrap();
    assert!(matches!(decode(&parsed, &ps_other, other), Err(Error::Corruption(_))));
    assert!(matches!(
        encode(&symbols[..10], &ps, grid),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn quantization_picks_nearest_samples() {
    let grid = default_grid();
    let a = grid.alpha_samples();
    let b = grid.beta_samples();
    let p = GgmParams::new(0.0, a[37], b[5]).unwrap();
    assert_eq!(grid.quantize_params(&p), (5, 37));
    let geo = (a[37] * a[38]).sqrt();
    assert_eq!(grid.quantize_params(&p.with_alpha(geo).unwrap()).1, 37);
    assert_eq!(grid.quantize_params(&p.with_alpha(100.0).unwrap()).1, 159);
    assert_eq!(grid.quantize_params(&p.with_beta(4.0).unwrap()).0, 19);
}
