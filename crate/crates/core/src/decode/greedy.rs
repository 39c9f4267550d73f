use super::{check_consistent, Alphabet, DecodeError, DecodeResult, Decoder, EmissionMatrix};

/// Per-step argmax, lowest index on ties, stopping at EOS.
pub fn greedy_decode(e: &EmissionMatrix, a: &Alphabet) -> Result<DecodeResult, DecodeError> {
    check_consistent(e, a)?;
    let mut symbols = Vec::new();
    let mut score = 0.0f64;
    for t in 0..e.steps() {
        let row = e.row(t);
        let mut best = 0;
        for (i, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = i;
            }
        }
        symbols.push(best);
        score += row[best] as f64;
        if best == a.eos() {
            break;
        }
    }
    Ok(DecodeResult::from_symbols(symbols, score, a))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Greedy;

impl Greedy {
    pub const NAME: &'static str = "greedy";
}

impl Decoder for Greedy {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn decode(&self, e: &EmissionMatrix, a: &Alphabet) -> Result<Vec<DecodeResult>, DecodeError> {
        greedy_decode(e, a).map(|r| vec![r])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::SymbolClass;

    fn toy() -> Alphabet {
        Alphabet::new(vec![
            ('ا', SymbolClass::Word),
            ('ب', SymbolClass::Word),
            ('ج', SymbolClass::Word),
            (' ', SymbolClass::NonWord),
            ('د', SymbolClass::Word),
            ('ه', SymbolClass::Word),
            ('$', SymbolClass::Eos),
        ])
        .unwrap()
    }

    fn one_hot(a: &Alphabet, text: &str) -> EmissionMatrix {
        let mut rows = Vec::new();
        for s in a.encode(text).unwrap().into_iter().chain([a.eos()]) {
            let mut row = vec![0.0; a.len()];
            row[s] = 1.0;
            rows.push(row);
        }
        EmissionMatrix::from_probs(&rows).unwrap()
    }

    #[test]
    fn one_hot_word() {
        let a = Alphabet::arabic();
        let r = greedy_decode(&one_hot(&a, "جمال"), &a).unwrap();
        assert_eq!(r.text, "جمال");
        assert_eq!(r.score, 0.0);
        assert_eq!(r.symbols.last(), Some(&a.eos()));
    }

    #[test]
    fn tie_goes_to_lowest_index() {
        let a = toy();
        let mut row = vec![0.0; 7];
        row[2] = 0.4;
        row[5] = 0.4;
        row[6] = 0.2;
        let e = EmissionMatrix::from_probs(&[row]).unwrap();
        assert_eq!(greedy_decode(&e, &a).unwrap().symbols, vec![2]);
    }

    #[test]
    fn stops_at_eos() {
        let a = toy();
        let mut rows = vec![vec![0.0; 7]; 3];
        rows[0][1] = 1.0;
        rows[1][6] = 1.0;
        rows[2][0] = 1.0;
        let e = EmissionMatrix::from_probs(&rows).unwrap();
        let r = greedy_decode(&e, &a).unwrap();
        assert_eq!(r.text, "ب");
        assert_eq!(r.symbols, vec![1, 6]);
    }

    #[test]
    fn dimension_mismatch() {
        let e = EmissionMatrix::from_probs(&[vec![1.0, 0.0]]).unwrap();
        assert!(matches!(greedy_decode(&e, &toy()), Err(DecodeError::DimensionMismatch { .. })));
    }
}
