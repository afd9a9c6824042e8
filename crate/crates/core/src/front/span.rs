use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Byte range in a source text together with the 1-based lines it touches.
///
/// `end` is exclusive. `end_line` is the line holding the last byte of the
/// range, or `start_line` for an empty range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub start_line: usize,
    pub end_line: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("offset {offset} is out of range for a source of {len} bytes")]
pub struct OutOfRange {
    pub offset: usize,
    pub len: usize,
}

/// Offsets of line starts for one source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineMap {
    starts: Vec<usize>,
    len: usize,
}

impl LineMap {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(
            text.bytes()
                .enumerate()
                .filter(|(_, b)| *b == b'\n')
                .map(|(i, _)| i + 1),
        );
        LineMap {
            starts,
            len: text.len(),
        }
    }

    pub fn line_count(&self) -> usize {
        self.starts.len()
    }

    pub fn source_len(&self) -> usize {
        self.len
    }

    pub fn line_starts(&self) -> &[usize] {
        &self.starts
    }

    /// 1-based line containing `offset`. `offset == len` maps to the last line.
    pub fn line_of(&self, offset: usize) -> Result<usize, OutOfRange> {
        if offset > self.len {
            return Err(OutOfRange {
                offset,
                len: self.len,
            });
        }
        Ok(self.starts.partition_point(|&s| s <= offset))
    }

    /// 1-based line and 1-based byte column.
    pub fn line_col(&self, offset: usize) -> Result<(usize, usize), OutOfRange> {
        let line = self.line_of(offset)?;
        Ok((line, offset - self.starts[line - 1] + 1))
    }

    /// Byte offset where `line` (1-based) begins.
    pub fn line_start(&self, line: usize) -> Option<usize> {
        self.starts.get(line.checked_sub(1)?).copied()
    }

    /// Byte offset one past the end of `line`, excluding its newline.
    pub fn line_end(&self, line: usize, text: &str) -> Option<usize> {
        let start = self.line_start(line)?;
        Some(
            match self.starts.get(line) {
                Some(next) => next - 1,
                None => text.len(),
            }
            .max(start),
        )
    }

    pub fn span(&self, start: usize, end: usize) -> Span {
        debug_assert!(start <= end && end <= self.len);
        let start_line = self.line_of(start).unwrap_or(self.starts.len());
        let end_line = if end > start {
            self.line_of(end - 1).unwrap_or(start_line)
        } else {
            start_line
        };
        Span {
            start,
            end,
            start_line,
            end_line,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_line(text: &str, offset: usize) -> usize {
        1 + text.as_bytes()[..offset]
            .iter()
            .filter(|b| **b == b'\n')
            .count()
    }

    #[test]
    fn offset_zero_is_line_one() {
        assert_eq!(LineMap::new("").line_of(0), Ok(1));
        assert_eq!(LineMap::new("abc\ndef").line_of(0), Ok(1));
    }

    #[test]
    fn end_of_text_maps_to_last_line() {
        let text = "a\nb\n";
        let map = LineMap::new(text);
        assert_eq!(map.line_of(text.len()), Ok(3));
        assert_eq!(map.line_count(), 3);
        assert!(map.line_of(text.len() + 1).is_err());
    }

    #[test]
    fn span_lines_use_last_byte() {
        let text = "ab\ncd\nef";
        let map = LineMap::new(text);
        let s = map.span(1, 6);
        assert_eq!((s.start_line, s.end_line), (1, 2));
        let empty = map.span(3, 3);
        assert_eq!((empty.start_line, empty.end_line), (2, 2));
    }

    #[test]
    fn line_bounds() {
        let text = "ab\ncd\nef";
        let map = LineMap::new(text);
        assert_eq!(map.line_start(2), Some(3));
        assert_eq!(map.line_end(2, text), Some(5));
        assert_eq!(map.line_end(3, text), Some(8));
        assert_eq!(map.line_start(4), None);
    }

    proptest::proptest! {
        #[test]
        fn agrees_with_newline_count(text in "[a-c\n]{0,64}", pick in 0usize..1000) {
            let map = LineMap::new(&text);
            let offset = pick % (text.len() + 1);
            proptest::prop_assert_eq!(map.line_of(offset).unwrap(), brute_line(&text, offset));
        }
    }
}
