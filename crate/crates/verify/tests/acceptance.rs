//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Set `ACCEPTANCE_SKIP_LONG=1` to skip the directional
//! Monte Carlo check (criterion 8); a skipped criterion is reported as such
//! and does not count as a pass.

use std::time::{Duration, Instant};

use ira_bench::design::{design_interleaver, DesignParams};
use ira_bench::config::SimConfig;
use ira_bench::sim::{run_curve, CSV_HEADER};
use ira_concat::channel::{awgn, channel_llrs, modulate, noiseless_llrs, transmit, ChannelParams, RngStream};
use ira_concat::concat::{concat_decode, concat_encode, ConcatCode, Schedule};
use ira_concat::error::{Error, Infeasibility};
use ira_concat::gf2::SparseBinaryMatrix;
use ira_concat::interleaver::{design, escalate_design, random_permutation, BlockPermutation, SensitiveSets};
use ira_concat::ira::{AceParams, IraCode};
use ira_concat::spa::SpaDecoder;
use ira_concat::stopping::{detect_from, is_stopping_set, sensitivity_histogram};
use rand::Rng;
use statrs::distribution::{Binomial, DiscreteCDF};
use statrs::function::erf::erfc;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reference_code(seed: u64) -> IraCode {
    IraCode::construct(128, 181, 10, AceParams::default(), seed).expect("construct [181,128]")
}

/// Parity of every row of `h` applied to `x`, computed from the row lists.
fn syndrome_is_zero(h: &SparseBinaryMatrix, x: &[u8]) -> bool {
    h.rows().iter().all(|row| row.iter().fold(0u8, |acc, &c| acc ^ x[c]) == 0)
}

fn random_bits(rng: &mut RngStream, n: usize) -> Vec<u8> {
    rng.bits(n)
}

fn c1_structure() -> Outcome {
    let code = reference_code(1);
    let h = code.h();
    let (k, m) = (128, 53);
    ensure(h.n_rows() == m && h.n_cols() == 181, || format!("H is {}x{}", h.n_rows(), h.n_cols()))?;
    for j in 0..m {
        let want: Vec<usize> = if j + 1 < m { vec![j, j + 1] } else { vec![j] };
        ensure(h.col(k + j) == want.as_slice(), || format!("parity column {j} = {:?}", h.col(k + j)))?;
    }
    let weight_one = (0..181).filter(|&c| h.col(c).len() == 1).count();
    ensure(weight_one == 1, || format!("{weight_one} weight-1 columns"))?;
    ensure((0..k).all(|c| h.col(c).len() >= 3), || "systematic column of degree < 3".into())?;
    ensure(h.rows().iter().all(|r| r.len() == 10), || "check degree != 10".into())?;
    let h1_rows: Vec<usize> = h.rows().iter().map(|r| r.iter().filter(|&&c| c < k).count()).collect();
    let total: usize = h1_rows.iter().sum();
    ensure(total == 425, || format!("H1 has {total} edges"))?;
    ensure(h1_rows[0] == 9 && h1_rows[1..].iter().all(|&w| w == 8), || format!("H1 row weights {h1_rows:?}"))?;
    ensure(code.audit().is_empty(), || format!("audit: {:?}", code.audit()))?;
    Ok("dual-diagonal H2, 1 weight-1 column, degrees >= 3, checks = 10, H1 = 9 + 52*8 = 425".into())
}

fn c2_encoder() -> Outcome {
    let code = reference_code(1);
    let mut rng = RngStream::new(2, 0);
    for i in 0..10_000 {
        let s = random_bits(&mut rng, 128);
        let x = code.encode(&s).unwrap();
        ensure(x[..128] == s[..], || format!("encode {i} not systematic"))?;
        ensure(syndrome_is_zero(code.h(), &x), || format!("encode {i} has nonzero syndrome"))?;
    }
    for i in 0..1000 {
        let a = random_bits(&mut rng, 128);
        let b = random_bits(&mut rng, 128);
        let ab: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let lhs = code.encode(&ab).unwrap();
        let rhs: Vec<u8> = code.encode(&a).unwrap().iter().zip(code.encode(&b).unwrap()).map(|(x, y)| x ^ y).collect();
        ensure(lhs == rhs, || format!("linearity fails on pair {i}"))?;
    }
    Ok("10^4 encodes with zero syndrome, 10^3 linear pairs".into())
}

fn c3_spa_tree() -> Outcome {
    let rows = vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 6, 7], vec![1, 8, 9], vec![7, 10, 11]];
    let masks: Vec<u32> = rows.iter().map(|r| r.iter().fold(0, |m, &c| m | 1 << c)).collect();
    let h = SparseBinaryMatrix::from_rows(5, 12, rows).unwrap();
    let dec = SpaDecoder::new(&h);
    let mut rng = RngStream::new(3, 0);
    let params = ChannelParams::new(0.0, 7.0 / 12.0).unwrap();
    let mut worst = 0.0f64;
    for trial in 0..100 {
        // Channel LLRs of a noisy transmission of a random codeword.
        let cw: u32 = loop {
            let x = (random_bits(&mut rng, 12).iter().enumerate().map(|(i, &b)| (b as u32) << i)).sum::<u32>();
            if masks.iter().all(|m| (m & x).count_ones() % 2 == 0) {
                break x;
            }
        };
        let bits: Vec<u8> = (0..12).map(|i| (cw >> i & 1) as u8).collect();
        let llr = transmit(&bits, &params, &mut RngStream::new(33, trial));
        let mut p = [[0.0f64; 2]; 12];
        for x in 0u32..1 << 12 {
            if masks.iter().any(|m| (m & x).count_ones() % 2 == 1) {
                continue;
            }
            let w = (0..12).filter(|&i| x >> i & 1 == 1).map(|i| -llr[i]).sum::<f64>().exp();
            for (i, pi) in p.iter_mut().enumerate() {
                pi[(x >> i & 1) as usize] += w;
            }
        }
        let out = dec.decode_fixed(&llr, &[0.0; 12], 12).unwrap();
        for i in 0..12 {
            worst = worst.max((out.posterior[i] - (p[i][0] / p[i][1]).ln()).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("max |SPA - exact| = {worst:e}"))?;
    Ok(format!("100 instances, max |SPA - exact marginal| = {worst:.2e}"))
}

fn c4_stopping() -> Outcome {
    let mut rng = RngStream::new(4, 0);
    for code_idx in 0..5 {
        let rows: Vec<Vec<usize>> =
            (0..6).map(|_| (0..12).filter(|_| rng.random_bool(0.3)).collect()).collect();
        let masks: Vec<u32> = rows.iter().map(|r| r.iter().fold(0, |m, &c| m | 1 << c)).collect();
        let h = SparseBinaryMatrix::from_rows(6, 12, rows).unwrap();
        for set in 1u32..1 << 12 {
            let members: Vec<usize> = (0..12).filter(|&i| set >> i & 1 == 1).collect();
            let brute = masks.iter().all(|m| (m & set).count_ones() != 1);
            ensure(is_stopping_set(h.tanner(), &members).unwrap() == brute, || {
                format!("code {code_idx}: verifier disagrees on subset {set:#x}")
            })?;
        }
    }
    let code = reference_code(1);
    let g = code.h().tanner();
    for v in 0..181 {
        let s = detect_from(g, v, 181).unwrap();
        // Independent check of the stopping property.
        let mut count = vec![0usize; 53];
        for &u in &s.members {
            for &c in g.checks_of(u) {
                count[c] += 1;
            }
        }
        ensure(s.contains(v) && count.iter().all(|&n| n != 1), || format!("start {v}: output is not a stopping set"))?;
    }
    let hist = sensitivity_histogram(g);
    ensure(hist.counts.len() == 181 && hist.max_count() <= 181, || format!("max count {}", hist.max_count()))?;
    Ok(format!("4095 subsets x 5 codes exact; 181 starts verified; max sensitivity {} <= 181", hist.max_count()))
}

/// Bad mappings counted straight from the definition.
fn bad_mappings(pi: &BlockPermutation, sets: &SensitiveSets) -> usize {
    let n = pi.n();
    (0..pi.len())
        .filter(|&p| sets.row_code_nodes.contains(&(p % n)) && sets.col_code_nodes.contains(&(pi.map(p) / n)))
        .count()
}

fn c5_interleaver() -> Outcome {
    let outer = reference_code(1);
    let inner = reference_code(2);
    let hr = sensitivity_histogram(outer.h().tanner());
    let hc = sensitivity_histogram(inner.h().tanner());
    let pi0 = random_permutation(128, 181, 7).unwrap();
    let pi = escalate_design(&hr, &hc, &pi0, 1, &mut RngStream::new(5, 0)).unwrap();
    let mut image: Vec<usize> = pi.forward().to_vec();
    image.sort_unstable();
    ensure(image.iter().enumerate().all(|(i, &d)| i == d), || "designed permutation is not a bijection".into())?;
    let t = pi.design().t;
    ensure(t > 0, || "escalation fell back to pi0".into())?;
    let bad = bad_mappings(&pi, &pi.design().sets);
    ensure(bad == 0, || format!("{bad} bad mappings at t={t}"))?;
    let sets = SensitiveSets::new(vec![0, 1, 2, 3], vec![1, 2, 3]);
    match design(&BlockPermutation::identity(4, 4), &sets, &mut RngStream::new(5, 1), 1000) {
        Err(Error::Infeasible(Infeasibility::CountingBound { demand: 16, capacity: 4 })) => {}
        other => return Err(format!("K=4/N=4 case returned {other:?}")),
    }
    Ok(format!("escalated to t={t}, bijective, 0 bad mappings ({} before); K=N=4 infeasible by counting", bad_mappings(&pi0, &pi.design().sets)))
}

fn toy_concat() -> ConcatCode {
    let ace = AceParams { eta: 0, ..AceParams::default() };
    let outer = IraCode::construct(8, 12, 8, ace, 1).unwrap();
    let inner = IraCode::construct(8, 12, 8, ace, 2).unwrap();
    ConcatCode::new(outer, inner, random_permutation(8, 12, 3).unwrap()).unwrap()
}

fn c6_round_trip() -> Outcome {
    let toy = toy_concat();
    for t in 0..1000 {
        let src = RngStream::new(6, t).bits(64);
        let out = concat_decode(&toy, &noiseless_llrs(&concat_encode(&toy, &src).unwrap()), Schedule::SHORT).unwrap();
        ensure(out.source_bits == src && out.converged, || format!("toy block {t} not recovered"))?;
    }
    let cc = ConcatCode::new(reference_code(1), reference_code(2), random_permutation(128, 181, 7).unwrap()).unwrap();
    for t in 0..10 {
        let src = RngStream::new(60, t).bits(16384);
        let tx = concat_encode(&cc, &src).unwrap();
        ensure(tx.len() == 32761, || format!("block of {} bits", tx.len()))?;
        let out = concat_decode(&cc, &noiseless_llrs(&tx), Schedule::SHORT).unwrap();
        ensure(out.source_bits == src && out.converged, || format!("full-size block {t} not recovered"))?;
    }
    let exact = 16384.0 / 32761.0;
    ensure((cc.rate() - exact).abs() < 1e-15, || format!("rate {}", cc.rate()))?;
    ensure(((cc.rate() * 1e5).round() - 50011.0).abs() < 0.5, || format!("rate {}", cc.rate()))?;
    Ok(format!("1000 toy + 10 full-size blocks recovered; rate = {:.6}", cc.rate()))
}

fn c7_channel() -> Outcome {
    let bits = 1_000_000usize;
    let mut report = Vec::new();
    for (i, &e) in [0.0, 2.0, 4.0].iter().enumerate() {
        let params = ChannelParams::new(e, 1.0).unwrap();
        let mut s = RngStream::new(7, i as u64);
        let tx = s.bits(bits);
        let y = awgn(&modulate(&tx), params.sigma, &mut s).unwrap();
        let errors = y.iter().zip(&tx).filter(|(v, &b)| (**v < 0.0) != (b == 1)).count();
        let ber = errors as f64 / bits as f64;
        let q = 0.5 * erfc((10f64.powf(e / 10.0)).sqrt());
        let se = (q * (1.0 - q) / bits as f64).sqrt();
        ensure((ber - q).abs() <= 3.0 * se, || format!("{e} dB: BER {ber:e} vs Q {q:e} (se {se:e})"))?;
        report.push(format!("{e}dB {:.2}se", (ber - q).abs() / se));
    }
    let params = ChannelParams::new(1.0, 0.5).unwrap();
    let mut s = RngStream::new(70, 0);
    let llr = channel_llrs(&awgn(&vec![1.0; bits], params.sigma, &mut s).unwrap(), params.sigma);
    let mean = llr.iter().sum::<f64>() / bits as f64;
    let var = llr.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (bits - 1) as f64;
    let ratio = var / (2.0 * mean);
    ensure((ratio - 1.0).abs() <= 0.02, || format!("Var/(2 Mean) = {ratio}"))?;
    Ok(format!("BER within 3 SE ({}); Var/(2 Mean) = {ratio:.4}", report.join(", ")))
}

const EVAL_EBNO: f64 = 1.8;

fn c8_directional() -> Outcome {
    let outer = reference_code(1);
    let inner = reference_code(2);
    let params = DesignParams { pilot_ebno_db: EVAL_EBNO, ..DesignParams::default() };
    let d = design_interleaver(&outer, &inner, &params).map_err(|e| e.to_string())?;
    let random = ConcatCode::new(outer.clone(), inner.clone(), d.pi0.clone()).unwrap();
    let designed = ConcatCode::new(outer, inner, d.designed.clone()).unwrap();
    let channel = ChannelParams::new(EVAL_EBNO, random.rate()).unwrap();
    // Paired trials: both systems see the same source and noise. The
    // evaluation seed differs from the pilot seed, so pi0 was not chosen on
    // these realizations.
    let (mut fr, mut fd, mut r_only, mut d_only, mut blocks) = (0u64, 0u64, 0u64, 0u64, 0u64);
    while (fr < 100 || fd < 100) && blocks < 20_000 {
        let mut fail = [false; 2];
        for (j, cc) in [&random, &designed].into_iter().enumerate() {
            let mut s = RngStream::new(2024, blocks);
            let src = s.bits(16384);
            let llr = transmit(&concat_encode(cc, &src).unwrap(), &channel, &mut s);
            fail[j] = concat_decode(cc, &llr, Schedule::SHORT).unwrap().source_bits != src;
        }
        blocks += 1;
        fr += fail[0] as u64;
        fd += fail[1] as u64;
        r_only += (fail[0] && !fail[1]) as u64;
        d_only += (fail[1] && !fail[0]) as u64;
    }
    let discordant = r_only + d_only;
    // One-sided exact sign test on discordant pairs: H0 says a discordant
    // block is equally likely to favour either interleaver.
    let p = if discordant == 0 { 1.0 } else { Binomial::new(0.5, discordant).unwrap().cdf(d_only) };
    let detail = format!(
        "{EVAL_EBNO} dB, t={}, {blocks} paired blocks: FER random {:.4} ({fr}), designed {:.4} ({fd}); discordant {r_only}/{d_only}, p = {p:.3e}",
        d.designed.design().t,
        fr as f64 / blocks as f64,
        fd as f64 / blocks as f64
    );
    ensure(fr >= 100 && fd >= 100, || format!("block cap reached: {detail}"))?;
    ensure(fd <= fr && p <= 0.05, || detail.clone())?;
    Ok(detail)
}

const DET_CONFIG: &str = r#"
mode = "concat"
ebno_db = [1.8, 2.2]
master_seed = 99
output = "curve.csv"
min_block_errors = 3
max_blocks = 12
batch = 5
[outer]
k = 128
n = 181
seed = 1
[inner]
k = 128
n = 181
seed = 2
[interleaver]
seed = 7
"#;

fn c9_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let base = SimConfig::from_toml(DET_CONFIG).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for workers in [1, 2, 4] {
        let out = dir.path().join(format!("w{workers}.csv"));
        let cfg = SimConfig { workers, output: out.clone(), ..base.clone() };
        run_curve(&cfg, |_| {}).map_err(|e| format!("{e:#}"))?;
        outputs.push(std::fs::read_to_string(&out).map_err(|e| e.to_string())?);
    }
    let a = &outputs[0];
    ensure(a.starts_with(CSV_HEADER) && a.lines().count() == 3, || format!("unexpected CSV:\n{a}"))?;
    ensure(outputs.iter().all(|o| o == a), || "CSV differs across worker counts".into())?;
    Ok(format!("workers 1/2/4 give byte-identical CSV ({} bytes)", a.len()))
}

fn main() {
    let skip_long = std::env::var_os("ACCEPTANCE_SKIP_LONG").is_some();
    let criteria: [(u32, &str, Option<Duration>, fn() -> Outcome); 9] = [
        (1, "structural fidelity", Some(Duration::from_secs(1)), c1_structure),
        (2, "encoder soundness", Some(Duration::from_secs(10)), c2_encoder),
        (3, "SPA exactness on a tree", Some(Duration::from_secs(10)), c3_spa_tree),
        (4, "stopping-set machinery", Some(Duration::from_secs(120)), c4_stopping),
        (5, "interleaver design contract", Some(Duration::from_secs(30)), c5_interleaver),
        (6, "concatenated round trip", Some(Duration::from_secs(120)), c6_round_trip),
        (7, "channel calibration", Some(Duration::from_secs(60)), c7_channel),
        (8, "designed vs random interleaver FER", None, c8_directional),
        (9, "determinism across worker counts", Some(Duration::from_secs(300)), c9_determinism),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        if id == 8 && skip_long {
            println!("criterion {id} {name}: SKIPPED (ACCEPTANCE_SKIP_LONG set)");
            continue;
        }
        let start = Instant::now();
        let result = run();
        let took = start.elapsed();
        let over = budget.filter(|b| took > *b);
        match (result, over) {
            (Ok(detail), None) => println!("criterion {id} {name}: PASS [{:.1}s] {detail}", took.as_secs_f64()),
            (Ok(detail), Some(b)) => {
                failed += 1;
                println!("criterion {id} {name}: FAIL [{:.1}s > {}s budget] {detail}", took.as_secs_f64(), b.as_secs());
            }
            (Err(why), _) => {
                failed += 1;
                println!("criterion {id} {name}: FAIL [{:.1}s] {why}", took.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
