use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// Keyword, identifier or number: a run of non-space characters other
    /// than `[ ] , | #`.
    Word(String),
    /// Bits between `|` and `>` (or `⟩`).
    Ket(String),
    LBracket,
    RBracket,
    Comma,
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Ket(k) => format!("`|{k}>`"),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '[' | ']' | ',' | '|' | '#')
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
        match c {
            '\n' => {
                chars.next();
                out.push(Token { tok: Tok::Newline, span });
                line += 1;
                col = 1;
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    chars.next();
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '[' | ']' | ',' => {
                chars.next();
                col += 1;
                let tok = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    _ => Tok::Comma,
                };
                out.push(Token { tok, span });
            }
            '|' => {
                chars.next();
                col += 1;
                let mut bits = String::new();
                loop {
                    let here = Span { line, col };
                    match chars.peek() {
                        Some('0') | Some('1') => {
                            bits.push(chars.next().unwrap());
                            col += 1;
                        }
                        Some('>') | Some('⟩') => {
                            chars.next();
                            col += 1;
                            break;
                        }
                        Some('\n') | None => {
                            return Err(ParseError::new(here, "unterminated ket, expected `>`"));
                        }
                        Some(other) => {
                            return Err(ParseError::new(
                                here,
                                format!("expected `0`, `1` or `>` in ket, found `{other}`"),
                            ));
                        }
                    }
                }
                if bits.is_empty() {
                    return Err(ParseError::new(span, "empty ket"));
                }
                out.push(Token { tok: Tok::Ket(bits), span });
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_word_char(c) {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    col += 1;
                }
                out.push(Token {
                    tok: Tok::Word(word),
                    span,
                });
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}
