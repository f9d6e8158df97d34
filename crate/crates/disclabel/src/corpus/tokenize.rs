use super::Token;

/// True for characters that may appear inside a word token.
fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-'
}

/// Whitespace-and-punctuation tokenizer for raw text.
///
/// Maximal runs of alphanumeric characters plus `'` and `-` form word
/// tokens; every other non-whitespace character becomes a single-character
/// token. Offsets are byte positions into the input.
pub fn tokenize_raw(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut word_start: Option<usize> = None;

    let push = |tokens: &mut Vec<Token>, begin: usize, end: usize| {
        tokens.push(Token {
            text: text[begin..end].to_string(),
            char_begin: begin,
            char_end: end,
            doc_index: tokens.len(),
        });
    };

    for (pos, c) in text.char_indices() {
        if is_word_char(c) {
            word_start.get_or_insert(pos);
            continue;
        }
        if let Some(begin) = word_start.take() {
            push(&mut tokens, begin, pos);
        }
        if !c.is_whitespace() {
            push(&mut tokens, pos, pos + c.len_utf8());
        }
    }
    if let Some(begin) = word_start {
        push(&mut tokens, begin, text.len());
    }
    tokens
}
