//! Token-window chunking: greedy left-to-right packing of whitespace tokens
//! into fixed-size chunks with optional overlap.

use thiserror::Error;

use crate::repr::Chunk;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChunkingConfigError {
    #[error("chunk_size must be at least 1")]
    ZeroChunkSize,
    #[error("overlap ({overlap}) must be smaller than chunk_size ({chunk_size})")]
    OverlapTooLarge { chunk_size: usize, overlap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkingConfig {
    pub chunk_size: usize,
    pub overlap: usize,
}

impl Default for ChunkingConfig {
    fn default() -> Self {
        Self {
            chunk_size: 512,
            overlap: 0,
        }
    }
}

impl ChunkingConfig {
    pub fn new(chunk_size: usize, overlap: usize) -> Result<Self, ChunkingConfigError> {
        let config = Self {
            chunk_size,
            overlap,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ChunkingConfigError> {
        if self.chunk_size == 0 {
            return Err(ChunkingConfigError::ZeroChunkSize);
        }
        if self.overlap >= self.chunk_size {
            return Err(ChunkingConfigError::OverlapTooLarge {
                chunk_size: self.chunk_size,
                overlap: self.overlap,
            });
        }
        Ok(())
    }
}

/// Byte spans of whitespace-delimited tokens, in order.
pub fn tokenize_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let mut start = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                spans.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        spans.push((s, text.len()));
    }
    spans
}

/// Cut `text` into chunks of `chunk_size` tokens (the last may be shorter),
/// with consecutive chunks sharing `overlap` tokens. Each chunk's text is the
/// exact byte span from its first token's start to its last token's end, so
/// inner whitespace is preserved.
pub fn chunk_text(
    doc_id: &str,
    text: &str,
    config: &ChunkingConfig,
) -> Result<Vec<Chunk>, ChunkingConfigError> {
    config.validate()?;
    let tokens = tokenize_spans(text);
    let mut chunks = Vec::new();
    if tokens.is_empty() {
        return Ok(chunks);
    }
    let step = config.chunk_size - config.overlap;
    let mut start = 0usize;
    loop {
        let end = (start + config.chunk_size).min(tokens.len());
        let byte_start = tokens[start].0;
        let byte_end = tokens[end - 1].1;
        chunks.push(Chunk {
            doc_id: doc_id.to_string(),
            index: chunks.len(),
            text: text[byte_start..byte_end].to_string(),
            token_count: end - start,
            start: byte_start,
            end: byte_end,
        });
        if end == tokens.len() {
            break;
        }
        start += step;
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn words(n: usize) -> String {
        (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    fn cfg(chunk_size: usize, overlap: usize) -> ChunkingConfig {
        ChunkingConfig::new(chunk_size, overlap).unwrap()
    }

    #[test]
    fn splits_1000_tokens_into_512_and_488() {
        let text = words(1000);
        let chunks = chunk_text("d", &text, &cfg(512, 0)).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].token_count, 512);
        assert_eq!(chunks[1].token_count, 488);
    }

    #[test]
    fn exact_fit_yields_single_chunk() {
        let text = words(512);
        let chunks = chunk_text("d", &text, &cfg(512, 0)).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_count, 512);
    }

    #[test]
    fn empty_text_yields_no_chunks() {
        assert!(chunk_text("d", "", &cfg(8, 0)).unwrap().is_empty());
        assert!(chunk_text("d", "  \n\t ", &cfg(8, 0)).unwrap().is_empty());
    }

    #[test]
    fn overlap_shares_tokens_between_neighbors() {
        let text = words(10);
        let chunks = chunk_text("d", &text, &cfg(4, 2)).unwrap();
        let token_lists: Vec<Vec<&str>> = chunks
            .iter()
            .map(|c| c.text.split_whitespace().collect())
            .collect();
        assert_eq!(token_lists.len(), 4);
        for pair in token_lists.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            assert_eq!(&prev[prev.len() - 2..], &next[..2]);
        }
        assert_eq!(token_lists[3], vec!["w6", "w7", "w8", "w9"]);
    }

    #[test]
    fn spans_point_back_into_source_text() {
        let text = "alpha  beta\n\tgamma delta";
        let chunks = chunk_text("d", text, &cfg(2, 0)).unwrap();
        assert_eq!(chunks.len(), 2);
        assert_eq!(chunks[0].text, "alpha  beta");
        assert_eq!(chunks[1].text, "gamma delta");
        for chunk in &chunks {
            assert_eq!(&text[chunk.start..chunk.end], chunk.text);
        }
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            ChunkingConfig::new(0, 0).unwrap_err(),
            ChunkingConfigError::ZeroChunkSize
        );
        assert_eq!(
            ChunkingConfig::new(4, 4).unwrap_err(),
            ChunkingConfigError::OverlapTooLarge {
                chunk_size: 4,
                overlap: 4
            }
        );
    }

    proptest! {
        /// Without overlap, chunk token sequences concatenate to exactly the
        /// source token sequence, sizes are full except the last, and spans
        /// are ordered and disjoint.
        #[test]
        fn no_overlap_partitions_tokens(
            n_tokens in 0usize..200,
            chunk_size in 1usize..20,
        ) {
            let text = words(n_tokens);
            let chunks = chunk_text("d", &text, &cfg(chunk_size, 0)).unwrap();

            let rejoined: Vec<&str> = chunks
                .iter()
                .flat_map(|c| c.text.split_whitespace())
                .collect();
            let original: Vec<&str> = text.split_whitespace().collect();
            prop_assert_eq!(rejoined, original);

            for (i, chunk) in chunks.iter().enumerate() {
                prop_assert_eq!(chunk.index, i);
                if i + 1 < chunks.len() {
                    prop_assert_eq!(chunk.token_count, chunk_size);
                    prop_assert!(chunk.end <= chunks[i + 1].start);
                }
            }
        }

        /// With overlap, consecutive chunks share exactly `overlap` tokens
        /// and every source token is covered.
        #[test]
        fn overlap_is_exact(
            n_tokens in 1usize..150,
            chunk_size in 2usize..12,
            overlap in 1usize..6,
        ) {
            prop_assume!(overlap < chunk_size);
            let text = words(n_tokens);
            let chunks = chunk_text("d", &text, &cfg(chunk_size, overlap)).unwrap();

            let lists: Vec<Vec<&str>> = chunks
                .iter()
                .map(|c| c.text.split_whitespace().collect())
                .collect();
            for pair in lists.windows(2) {
                let shared = &pair[0][pair[0].len() - overlap..];
                prop_assert_eq!(shared, &pair[1][..overlap]);
            }
            let covered: std::collections::BTreeSet<&str> =
                lists.iter().flatten().copied().collect();
            prop_assert_eq!(covered.len(), n_tokens);
        }
    }
}
