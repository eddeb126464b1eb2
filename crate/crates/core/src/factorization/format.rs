//! The factorization text format.
//!
//! ```text
//! # Prime factorization of Catalan(5)
//! # n=5
//! # estimated_digits=2
//! # prime_count=3
//! # exponent=1 count=3
//! 2 3 7
//! ```
//!
//! Blocks come in descending exponent order. Long prime lists wrap onto
//! continuation lines; every non-comment line up to the next `#` line belongs
//! to the current block. Unknown `#` lines are comments.

use std::io::{BufRead, Write};

use super::{ExponentGroup, Factorization};
use crate::error::{Error, Result};
use crate::valuation::RatioSpec;

const TITLE: &str = "# Prime factorization of ";
pub const DEFAULT_LINE_WIDTH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatOptions {
    /// Soft maximum line length in bytes; a single prime longer than this
    /// still gets its own line.
    pub line_width: usize,
}

impl Default for FormatOptions {
    fn default() -> Self {
        FormatOptions {
            line_width: DEFAULT_LINE_WIDTH,
        }
    }
}

pub fn serialize(f: &Factorization, sink: &mut impl Write) -> Result<()> {
    serialize_with(f, sink, &FormatOptions::default())
}

pub fn serialize_with(f: &Factorization, sink: &mut impl Write, options: &FormatOptions) -> Result<()> {
    writeln!(sink, "{TITLE}{}", f.spec())?;
    if let Some(n) = f.spec().as_catalan() {
        writeln!(sink, "# n={n}")?;
    }
    writeln!(sink, "# estimated_digits={}", f.digit_estimate().digits)?;
    writeln!(sink, "# prime_count={}", f.prime_count())?;

    let mut buf = itoa_buffer();
    for group in f.groups() {
        writeln!(sink, "# exponent={} count={}", group.exponent, group.primes.len())?;
        let mut line_len = 0;
        for &p in &group.primes {
            let token = format_u64(&mut buf, p);
            if line_len > 0 && line_len + 1 + token.len() > options.line_width {
                sink.write_all(b"\n")?;
                line_len = 0;
            }
            if line_len > 0 {
                sink.write_all(b" ")?;
                line_len += 1;
            }
            sink.write_all(token)?;
            line_len += token.len();
        }
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

fn itoa_buffer() -> [u8; 20] {
    [0; 20]
}

fn format_u64(buf: &mut [u8; 20], mut v: u64) -> &[u8] {
    let mut i = buf.len();
    loop {
        i -= 1;
        buf[i] = b'0' + (v % 10) as u8;
        v /= 10;
        if v == 0 {
            return &buf[i..];
        }
    }
}

struct Block {
    exponent: u64,
    declared: usize,
    line: usize,
    primes: Vec<u64>,
}

impl Block {
    fn finish(self) -> Result<ExponentGroup> {
        if self.primes.len() != self.declared {
            return Err(Error::parse(
                self.line,
                format!(
                    "block exponent={} declares count={} but lists {} primes",
                    self.exponent,
                    self.declared,
                    self.primes.len()
                ),
            ));
        }
        ExponentGroup::new(self.exponent, self.primes).map_err(|e| Error::parse(self.line, e.to_string()))
    }
}

/// Reads a factorization written by [`serialize`]. Accepts wrapped or
/// single-line blocks in any exponent order; `estimated_digits` is recomputed
/// rather than trusted.
pub fn parse(source: impl BufRead) -> Result<Factorization> {
    let mut spec = None;
    let mut declared_n = None;
    let mut declared_prime_count = None;
    let mut groups = Vec::new();
    let mut current: Option<Block> = None;
    let mut line_no = 0;

    for line in source.lines() {
        line_no += 1;
        let line = line?;
        let line = line.trim_end();

        if spec.is_none() {
            let rest = line
                .strip_prefix(TITLE)
                .ok_or_else(|| Error::parse(line_no, "missing `# Prime factorization of` header"))?;
            spec =
                Some(parse_spec(rest).ok_or_else(|| Error::parse(line_no, format!("unrecognised sequence `{rest}`")))?);
            continue;
        }

        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("exponent=") {
                if let Some(block) = current.take() {
                    groups.push(block.finish()?);
                }
                current = Some(parse_block_header(rest, line_no)?);
            } else if let Some(v) = comment.strip_prefix("n=") {
                declared_n = Some((parse_number(v.trim(), line_no)?, line_no));
            } else if let Some(v) = comment.strip_prefix("prime_count=") {
                declared_prime_count = Some((parse_number(v.trim(), line_no)?, line_no));
            }
            continue;
        }

        if line.trim().is_empty() {
            continue;
        }
        let block = current
            .as_mut()
            .ok_or_else(|| Error::parse(line_no, "primes listed before any `# exponent=` block"))?;
        for token in line.split_ascii_whitespace() {
            let p = parse_number(token, line_no)?;
            if let Some(&prev) = block.primes.last() {
                if p <= prev {
                    return Err(Error::parse(
                        line_no,
                        format!("primes not strictly ascending: {p} after {prev}"),
                    ));
                }
            }
            block.primes.push(p);
        }
    }

    let spec = spec.ok_or_else(|| Error::parse(line_no.max(1), "empty input: missing header"))?;
    if let Some(block) = current.take() {
        groups.push(block.finish()?);
    }
    if let Some((n, at)) = declared_n {
        if spec.as_catalan() != Some(n) {
            return Err(Error::parse(at, format!("`n={n}` does not match header {spec}")));
        }
    }
    let f = Factorization::new(spec, groups).map_err(|e| Error::parse(line_no, e.to_string()))?;
    if let Some((count, at)) = declared_prime_count {
        if count != f.prime_count() {
            return Err(Error::parse(
                at,
                format!("prime_count={count} but blocks list {} primes", f.prime_count()),
            ));
        }
    }
    Ok(f)
}

fn parse_number(token: &str, line: usize) -> Result<u64> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("expected a non-negative integer, found `{token}`")))
}

fn parse_block_header(rest: &str, line: usize) -> Result<Block> {
    let malformed = || Error::parse(line, format!("malformed block header `# exponent={rest}`"));
    let (exponent, count) = rest.split_once(char::is_whitespace).ok_or_else(malformed)?;
    let count = count.trim().strip_prefix("count=").ok_or_else(malformed)?;
    Ok(Block {
        exponent: parse_number(exponent, line)?,
        declared: parse_number(count, line)? as usize,
        line,
        primes: Vec::new(),
    })
}

fn parse_spec(text: &str) -> Option<RatioSpec> {
    let text = text.trim();
    if !(text.starts_with("Catalan(") || text.starts_with("Ratio(")) {
        return None;
    }
    text.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorization::{factorize, FactorizeConfig};

    fn catalan(n: u64) -> Factorization {
        factorize(&RatioSpec::catalan(n).unwrap(), &FactorizeConfig::default()).unwrap()
    }

    fn to_text(f: &Factorization, width: usize) -> String {
        let mut out = Vec::new();
        serialize_with(f, &mut out, &FormatOptions { line_width: width }).unwrap();
        String::from_utf8(out).unwrap()
    }

    fn parse_str(s: &str) -> Result<Factorization> {
        parse(s.as_bytes())
    }

    #[test]
    fn catalan_five_text() {
        assert_eq!(
            to_text(&catalan(5), DEFAULT_LINE_WIDTH),
            "# Prime factorization of Catalan(5)\n# n=5\n# estimated_digits=2\n# prime_count=3\n\
             # exponent=1 count=3\n2 3 7\n"
        );
    }

    #[test]
    fn catalan_one_has_no_blocks() {
        let text = to_text(&catalan(1), DEFAULT_LINE_WIDTH);
        assert_eq!(
            text,
            "# Prime factorization of Catalan(1)\n# n=1\n# estimated_digits=1\n# prime_count=0\n"
        );
        assert!(parse_str(&text).unwrap().is_empty());
    }

    #[test]
    fn round_trip_with_wrapping() {
        let f = catalan(100);
        for width in [1, 10, 80, DEFAULT_LINE_WIDTH] {
            let text = to_text(&f, width);
            if width == 10 {
                assert!(text.lines().all(|l| l.starts_with('#') || l.len() <= 10));
            }
            assert_eq!(parse_str(&text).unwrap(), f);
        }
    }

    #[test]
    fn accepts_any_block_order_and_comments() {
        let text = "# Prime factorization of Catalan(10)\n# produced elsewhere\n\
                    # exponent=1 count=3\n13 17\n19\n\n# exponent=2 count=1\n2\n";
        let f = parse_str(text).unwrap();
        assert_eq!(f, catalan(10));
    }

    #[test]
    fn general_ratio_round_trip() {
        let f = factorize(
            &RatioSpec::multinomial(&[3, 4, 5]).unwrap(),
            &FactorizeConfig::default(),
        )
        .unwrap();
        let text = to_text(&f, 80);
        assert!(text.starts_with("# Prime factorization of Ratio(12/3,4,5)\n# estimated_digits="));
        assert_eq!(parse_str(&text).unwrap(), f);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let head = "# Prime factorization of Catalan(5)\n";
        let cases = [
            ("", 1, "missing header"),
            ("hello\n", 1, "missing"),
            ("# Prime factorization of Fibonacci(5)\n", 1, "unrecognised"),
            (&*format!("{head}# exponent=1 count=3\n2 3\n"), 2, "count=3"),
            (&*format!("{head}# exponent=1 count=2\n2 x\n"), 3, "`x`"),
            (&*format!("{head}# exponent=1 count=2\n3 2\n"), 3, "ascending"),
            (&*format!("{head}2 3\n"), 2, "before any"),
            (&*format!("{head}# exponent=one count=1\n2\n"), 2, "`one`"),
            (&*format!("{head}# exponent=1\n2\n"), 2, "malformed"),
            (
                &*format!("{head}# exponent=1 count=2\n2 3\n# exponent=2 count=1\n3\n"),
                5,
                "more than one",
            ),
            (
                &*format!("{head}# prime_count=4\n# exponent=1 count=3\n2 3 7\n"),
                2,
                "prime_count=4",
            ),
            (&*format!("{head}# n=6\n# exponent=1 count=3\n2 3 7\n"), 2, "n=6"),
        ];
        for (text, line, needle) in cases {
            match parse_str(text) {
                Err(Error::Parse { line: got, message }) => {
                    assert_eq!(got, line, "{text:?}: {message}");
                    assert!(message.contains(needle), "{text:?}: {message}");
                }
                other => panic!("{text:?}: expected parse error, got {other:?}"),
            }
        }
    }
}
