use super::beam::{select, sort_hyps, to_results, Cand, Hyp};
use super::{check_consistent, Alphabet, DecodeConfig, DecodeError, DecodeResult, Decoder, EmissionMatrix};

/// Grouped beam search with a Hamming diversity term: at every step the
/// groups are extended in order, and group `g` ranks an extension by its
/// log-probability minus `dbs_penalty` times the number of beams in groups
/// `0..g` that picked the same symbol at this step. Stored scores stay
/// plain log-probabilities. Returns each group's beams, best first.
pub fn diverse_beam_search_groups(
    e: &EmissionMatrix,
    a: &Alphabet,
    cfg: &DecodeConfig,
) -> Result<Vec<Vec<DecodeResult>>, DecodeError> {
    check_consistent(e, a)?;
    cfg.check_groups()?;
    let per_group = cfg.beam_width / cfg.dbs_groups;
    let mut groups: Vec<Vec<Hyp<()>>> = vec![vec![Hyp::empty()]; cfg.dbs_groups];
    let mut usage = vec![0u32; e.vocab()];

    for t in 0..cfg.steps(e) {
        if groups.iter().flatten().all(|h| h.done) {
            break;
        }
        let row = e.row(t);
        usage.iter_mut().for_each(|u| *u = 0);
        for group in groups.iter_mut() {
            let mut cands = Vec::with_capacity(group.len() * row.len());
            for (i, h) in group.iter().enumerate() {
                if h.done {
                    cands.push(Cand::carry(i, h));
                    continue;
                }
                for (s, &lp) in row.iter().enumerate() {
                    let score = h.score + lp as f64;
                    let rank = if cfg.dbs_penalty == 0.0 {
                        score
                    } else {
                        score - cfg.dbs_penalty * usage[s] as f64
                    };
                    cands.push(Cand {
                        parent: i,
                        symbol: Some(s),
                        score,
                        rank,
                        done: s == a.eos(),
                        state: (),
                    });
                }
            }
            let next = select(group, cands, per_group);
            for h in &next {
                // only beams that consumed this step count towards diversity
                if h.symbols.len() == t + 1 {
                    usage[h.symbols[t]] += 1;
                }
            }
            *group = next;
        }
    }
    Ok(groups
        .into_iter()
        .map(|mut g| {
            sort_hyps(&mut g);
            to_results(g, a)
        })
        .collect())
}

/// All groups' beams merged and sorted by log-probability.
pub fn diverse_beam_search(e: &EmissionMatrix, a: &Alphabet, cfg: &DecodeConfig) -> Result<Vec<DecodeResult>, DecodeError> {
    let mut all: Vec<DecodeResult> = diverse_beam_search_groups(e, a, cfg)?.into_iter().flatten().collect();
    all.sort_by(|x, y| y.score.total_cmp(&x.score).then_with(|| x.symbols.cmp(&y.symbols)));
    Ok(all)
}

#[derive(Clone, Debug)]
pub struct DiverseBeamSearch {
    config: DecodeConfig,
}

impl DiverseBeamSearch {
    pub const NAME: &'static str = "diverse-beam";

    pub fn new(config: DecodeConfig) -> Self {
        Self { config }
    }
}

impl Decoder for DiverseBeamSearch {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn decode(&self, e: &EmissionMatrix, a: &Alphabet) -> Result<Vec<DecodeResult>, DecodeError> {
        diverse_beam_search(e, a, &self.config)
    }
}
