use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Unsigned numeric literal; `is_int` is false when a fraction was written.
    Number { value: f64, is_int: bool },
    Semi,
    Comma,
    Colon,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    DotDot,
    Eq,
    Le,
    Ge,
    Lt,
    Gt,
    Ne,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number { value, .. } => format!("number `{value}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    pub(crate) fn symbol(&self) -> &'static str {
        match self {
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::DotDot => "..",
            Tok::Eq => "=",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Ne => "<>",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Ident(_) => "identifier",
            Tok::Number { .. } => "number",
            Tok::Eof => "end of input",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let mut push = |tok: Tok| out.push(Spanned { tok, line: start_line, col: start_col });

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '!' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            push(Tok::Ident(text));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_int = true;
            // `1..2` is a range, `1.5` a fraction
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let value = text.parse::<f64>().map_err(|_| ParseError {
                line: start_line,
                col: start_col,
                found: format!("number `{text}`"),
                expected: vec!["number".into()],
            })?;
            push(Tok::Number { value, is_int });
            continue;
        }

        let two: Option<Tok> = chars.get(i + 1).and_then(|&n| match (c, n) {
            ('.', '.') => Some(Tok::DotDot),
            ('<', '=') => Some(Tok::Le),
            ('>', '=') => Some(Tok::Ge),
            ('<', '>') => Some(Tok::Ne),
            _ => None,
        });
        if let Some(tok) = two {
            push(tok);
            i += 2;
            col += 2;
            continue;
        }
        let one = match c {
            ';' => Tok::Semi,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '=' => Tok::Eq,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            other => {
                return Err(ParseError {
                    line,
                    col,
                    found: format!("character `{other}`"),
                    expected: vec!["token".into()],
                })
            }
        };
        push(one);
        i += 1;
        col += 1;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}
