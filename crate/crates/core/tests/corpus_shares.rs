//! Best-fit family shares over synthetic corpora.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, LogNormal};

use soundnet_core::corpus::{corpus_report, Alignment, CorpusReport, PieceAnalysisRef};
use soundnet_core::distfit::{best_fit, DistFamily, FitReport};
use soundnet_core::network::{build_network, PitchGrid, SoundNetwork};

fn exponential_sequence(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = Exp::new(1.0 / 400.0).unwrap();
    (0..n).map(|_| 80.0 + e.sample(&mut rng)).collect()
}

/// Shifted standard lognormal, the shape a Gibrat fit describes.
fn gibrat_sequence(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = LogNormal::new(0.0, 1.0).unwrap();
    (0..n).map(|_| 120.0 + 250.0 * g.sample(&mut rng)).collect()
}

fn analyse(seqs: &[Vec<f64>]) -> (Vec<String>, Vec<FitReport>, Vec<SoundNetwork>) {
    let ids = (0..seqs.len()).map(|i| format!("p{i:02}")).collect();
    let fits = seqs.iter().map(|s| best_fit(s).unwrap()).collect();
    let nets = seqs.iter().map(|s| build_network(s, PitchGrid::default()).unwrap()).collect();
    (ids, fits, nets)
}

fn report(ids: &[String], fits: &[FitReport], nets: &[SoundNetwork]) -> CorpusReport {
    let refs: Vec<PieceAnalysisRef<'_>> = ids
        .iter()
        .zip(fits)
        .zip(nets)
        .map(|((id, f), n)| PieceAnalysisRef { id, fit: Some(f), network: n })
        .collect();
    corpus_report(&refs, Alignment::Union)
}

#[test]
fn exponential_corpus_is_exponential_or_better() {
    let seqs: Vec<Vec<f64>> = (0..14).map(|s| exponential_sequence(s, 2000)).collect();
    let (ids, fits, nets) = analyse(&seqs);
    let r = report(&ids, &fits, &nets);
    for f in &fits {
        let best = f.d(f.best).unwrap();
        assert!(best <= f.d(DistFamily::Exponential).unwrap());
    }
    let total: usize = r.family_share.values().map(|s| s.count).sum();
    assert_eq!(total, 14);
    assert_eq!(r.family_share[&DistFamily::Exponential].count, 14);
    assert_eq!(r.family_share[&DistFamily::Exponential].share, 1.0);
    let m = r.comparison.corr_matrix.as_ref().unwrap();
    assert_eq!(m.len(), 14);
    for i in 0..14 {
        assert_eq!(m[i][i], Some(1.0));
        for j in 0..14 {
            assert_eq!(m[i][j], m[j][i]);
        }
    }
}

#[test]
fn one_gibrat_piece_among_exponentials() {
    let mut seqs: Vec<Vec<f64>> = (0..13).map(|s| exponential_sequence(100 + s, 2000)).collect();
    seqs.insert(4, gibrat_sequence(7, 2000));
    let (ids, fits, nets) = analyse(&seqs);
    let r = report(&ids, &fits, &nets);
    assert_eq!(r.rows[4].best_family, Some(DistFamily::Gibrat));
    assert_eq!(r.family_share[&DistFamily::Exponential].count, 13);
    assert_eq!(r.family_share[&DistFamily::Gibrat].count, 1);
    assert!((r.family_share[&DistFamily::Gibrat].share - 1.0 / 14.0).abs() < 1e-15);
}
