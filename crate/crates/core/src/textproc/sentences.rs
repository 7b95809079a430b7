use alloc::string::{String, ToString};
use alloc::vec::Vec;

/// Split a description into candidate answer sentences.
///
/// Breaks on newlines and after `.`, `!` or `?` when followed by whitespace.
/// Pieces are trimmed and empty pieces dropped; the terminal punctuation stays
/// with its sentence.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let cut = match c {
            '\n' => Some((i, i + 1)),
            '.' | '!' | '?' => match chars.peek() {
                Some(&(_, next)) if next.is_whitespace() => Some((i + 1, i + 1)),
                _ => None,
            },
            _ => None,
        };
        if let Some((end, resume)) = cut {
            push_trimmed(&mut out, &text[start..end]);
            start = resume;
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}
