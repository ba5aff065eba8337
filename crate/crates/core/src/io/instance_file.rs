//! Line-oriented instance format.
//!
//! ```text
//! # comment
//! agents 2
//! items 3
//! scoring borda
//! agentcap 0 1 2
//! agentcap * 1 2
//! itemcap 2 1 1
//! itemname 0 keynote
//! pref 0: 0,{1,2}
//! util 0: 5,2,2
//! ```
//!
//! Indices are 0-based. `*` in a cap line applies it to every agent or item.
//! Missing agent caps default to `0 m`, missing item caps to `1 1`. Without
//! `util` lines utilities are Borda scores; `util` lines must then cover
//! every agent.

use std::fmt::Write as _;

use crate::error::IoError;
use crate::model::{build_instance, Capacity, Instance};

pub(super) struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> IoError {
        IoError::parse(
            self.line,
            self.text[..self.pos].chars().count() + 1,
            message,
        )
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<&'a str, IoError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .find(|c: char| c.is_whitespace() || matches!(c, ',' | ':' | '{' | '}'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.err("expected a value"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, IoError> {
        let start = self.pos;
        let word = self.word()?;
        word.parse().map_err(|_| {
            self.pos = start;
            self.skip_ws();
            self.err(format!("expected {what}, found `{word}`"))
        })
    }

    fn index_or_all(&mut self, what: &str, bound: usize) -> Result<Option<usize>, IoError> {
        if self.eat('*') {
            return Ok(None);
        }
        let start = self.pos;
        let k: usize = self.number(what)?;
        if k >= bound {
            self.pos = start;
            self.skip_ws();
            return Err(self.err(format!("{what} {k} out of range (0..{bound})")));
        }
        Ok(Some(k))
    }

    fn finish(&mut self) -> Result<(), IoError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }
}

/// Parses `a,{b,c},d` into classes. Shared with the PrefLib reader, which
/// passes `offset = 1` for 1-based alternatives.
pub(super) fn parse_classes(
    cursor: &mut Cursor<'_>,
    offset: usize,
) -> Result<Vec<Vec<usize>>, IoError> {
    let mut classes = Vec::new();
    loop {
        if cursor.eat('{') {
            let mut class = Vec::new();
            loop {
                class.push(item_index(cursor, offset)?);
                if cursor.eat('}') {
                    break;
                }
                if !cursor.eat(',') {
                    return Err(cursor.err("expected `,` or `}` inside a tie"));
                }
            }
            classes.push(class);
        } else {
            classes.push(vec![item_index(cursor, offset)?]);
        }
        if cursor.at_end() {
            return Ok(classes);
        }
        if !cursor.eat(',') {
            return Err(cursor.err("expected `,` between classes"));
        }
    }
}

fn item_index(cursor: &mut Cursor<'_>, offset: usize) -> Result<usize, IoError> {
    let start = cursor.pos;
    let k: usize = cursor.number("an item index")?;
    if k < offset {
        cursor.pos = start;
        cursor.skip_ws();
        return Err(cursor.err("item indices start at 1"));
    }
    Ok(k - offset)
}

pub(super) fn cursor(line: usize, text: &str) -> Cursor<'_> {
    Cursor { line, text, pos: 0 }
}

pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let mut n: Option<usize> = None;
    let mut m: Option<usize> = None;
    let mut borda = false;
    let mut agent_caps: Vec<Option<Capacity>> = Vec::new();
    let mut item_caps: Vec<Option<Capacity>> = Vec::new();
    let mut names: Vec<Option<String>> = Vec::new();
    let mut prefs: Vec<Option<Vec<Vec<usize>>>> = Vec::new();
    let mut utils: Vec<Option<Vec<f64>>> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let mut c = cursor(line_no, content);
        if c.at_end() {
            continue;
        }
        let keyword = c.word()?;
        let sizes = |c: &Cursor| match (n, m) {
            (Some(n), Some(m)) => Ok((n, m)),
            _ => Err(c.err(format!("`{keyword}` before `agents` and `items`"))),
        };
        match keyword {
            "agents" | "items" => {
                let v: usize = c.number("a count")?;
                let slot = if keyword == "agents" { &mut n } else { &mut m };
                if slot.is_some() {
                    return Err(c.err(format!("duplicate `{keyword}` line")));
                }
                *slot = Some(v);
                if let (Some(n), Some(m)) = (n, m) {
                    agent_caps = vec![None; n];
                    item_caps = vec![None; m];
                    names = vec![None; m];
                    prefs = vec![None; n];
                    utils = vec![None; n];
                }
            }
            "scoring" => {
                let rule = c.word()?;
                if rule != "borda" {
                    return Err(c.err(format!("unknown scoring rule `{rule}`")));
                }
                borda = true;
            }
            "agentcap" | "itemcap" => {
                let (n, m) = sizes(&c)?;
                let (what, bound, caps) = if keyword == "agentcap" {
                    ("agent", n, &mut agent_caps)
                } else {
                    ("item", m, &mut item_caps)
                };
                let target = c.index_or_all(what, bound)?;
                let lo: usize = c.number("a lower bound")?;
                let hi: usize = c.number("an upper bound")?;
                match target {
                    Some(k) => caps[k] = Some(Capacity::new(lo, hi)),
                    None => caps
                        .iter_mut()
                        .for_each(|cap| *cap = Some(Capacity::new(lo, hi))),
                }
            }
            "itemname" => {
                let (_, m) = sizes(&c)?;
                let o = c
                    .index_or_all("item", m)?
                    .ok_or_else(|| c.err("`*` not allowed here"))?;
                let name = c.word()?.to_string();
                names[o] = Some(name);
            }
            "pref" | "util" => {
                let (n, _) = sizes(&c)?;
                let i = c
                    .index_or_all("agent", n)?
                    .ok_or_else(|| c.err("`*` not allowed here"))?;
                if !c.eat(':') {
                    return Err(c.err("expected `:` after the agent index"));
                }
                if keyword == "pref" {
                    if prefs[i].is_some() {
                        return Err(c.err(format!("duplicate preferences for agent {i}")));
                    }
                    prefs[i] = Some(parse_classes(&mut c, 0)?);
                } else {
                    if utils[i].is_some() {
                        return Err(c.err(format!("duplicate utilities for agent {i}")));
                    }
                    let mut row = vec![c.number::<f64>("a utility")?];
                    while c.eat(',') {
                        row.push(c.number::<f64>("a utility")?);
                    }
                    if let Some(bad) = row.iter().find(|u| !u.is_finite()) {
                        return Err(c.err(format!("utility {bad} is not finite")));
                    }
                    utils[i] = Some(row);
                }
            }
            other => return Err(c.err(format!("unknown keyword `{other}`"))),
        }
        c.finish()?;
    }

    let end = last_line + 1;
    let (n, m) = match (n, m) {
        (Some(n), Some(m)) => (n, m),
        _ => return Err(IoError::parse(end, 1, "missing `agents` or `items` line")),
    };
    let profile = prefs
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.ok_or_else(|| IoError::parse(end, 1, format!("no `pref` line for agent {i}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let given = utils.iter().filter(|u| u.is_some()).count();
    let utilities = match given {
        0 => None,
        _ if borda => {
            return Err(IoError::parse(
                end,
                1,
                "`scoring borda` conflicts with `util` lines",
            ))
        }
        g if g == n => Some(utils.into_iter().flatten().collect()),
        _ => {
            return Err(IoError::parse(
                end,
                1,
                "`util` lines must cover every agent",
            ))
        }
    };
    let agent_caps = agent_caps
        .into_iter()
        .map(|c| c.unwrap_or(Capacity::new(0, m)))
        .collect();
    let item_caps = item_caps
        .into_iter()
        .map(|c| c.unwrap_or(Capacity::exactly(1)))
        .collect();
    let instance = build_instance(profile, utilities, agent_caps, item_caps)?;
    if names.iter().all(Option::is_none) {
        return Ok(instance);
    }
    let names = names
        .into_iter()
        .enumerate()
        .map(|(o, name)| name.unwrap_or_else(|| o.to_string()))
        .collect();
    Ok(instance.with_item_names(names)?)
}

/// Writes every field explicitly, utilities included, so that parsing the
/// output gives back an equal instance.
pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "agents {}", instance.n());
    let _ = writeln!(out, "items {}", instance.m());
    for (i, cap) in instance.agent_caps().iter().enumerate() {
        let _ = writeln!(out, "agentcap {i} {} {}", cap.lo, cap.hi);
    }
    for (o, cap) in instance.item_caps().iter().enumerate() {
        let _ = writeln!(out, "itemcap {o} {} {}", cap.lo, cap.hi);
    }
    for (o, name) in instance.item_names().iter().enumerate() {
        let _ = writeln!(out, "itemname {o} {name}");
    }
    for i in 0..instance.n() {
        let classes: Vec<String> = instance
            .prefs(i)
            .classes()
            .iter()
            .map(|class| match class.as_slice() {
                [single] => single.to_string(),
                many => format!("{{{}}}", join(many)),
            })
            .collect();
        let _ = writeln!(out, "pref {i}: {}", classes.join(","));
    }
    for i in 0..instance.n() {
        let _ = writeln!(out, "util {i}: {}", join(instance.utilities(i)));
    }
    out
}

fn join<T: ToString>(values: &[T]) -> String {
    values
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ModelError;
    use crate::model::borda_utilities;

    const SMALL: &str = "\
# two agents, three items
agents 2
items 3
agentcap * 1 2
itemcap 2 0 1
pref 0: 0,{1,2}
pref 1: 2, 1, 0
";

    #[test]
    fn parses_defaults_and_borda() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(inst.agent_cap(1), Capacity::new(1, 2));
        assert_eq!(inst.item_cap(0), Capacity::exactly(1));
        assert_eq!(inst.item_cap(2), Capacity::new(0, 1));
        assert_eq!(inst.prefs(0).classes(), &[vec![0], vec![1, 2]]);
        assert_eq!(
            inst.utilities(0),
            borda_utilities(inst.profile(), 3)[0].as_slice()
        );
        assert_eq!(inst.utilities(0), &[3.0, 1.5, 1.5]);
    }

    #[test]
    fn round_trip() {
        let mut text = SMALL.to_string();
        text.push_str("itemname 1 poster\n");
        let inst = parse_instance(&text).unwrap();
        let again = parse_instance(&serialize_instance(&inst)).unwrap();
        assert_eq!(inst, again);
        assert_eq!(again.item_name(1), Some("poster"));
        assert_eq!(again.item_name(0), Some("0"));
    }

    #[test]
    fn inconsistent_utilities_rejected() {
        let text = "agents 1\nitems 2\nagentcap 0 0 2\npref 0: 0,1\nutil 0: 1,2\n";
        assert!(matches!(
            parse_instance(text),
            Err(IoError::Model(ModelError::InconsistentUtilities { .. }))
        ));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_instance("agents 2\nitems x\n") {
            Err(IoError::Parse { line, column, .. }) => assert_eq!((line, column), (2, 7)),
            other => panic!("{other:?}"),
        }
        match parse_instance("agents 1\nitems 2\npref 0: 0,{1\n") {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_instance("agents 1\nitems 1\n"),
            Err(IoError::Parse { .. })
        ));
        assert!(matches!(
            parse_instance("frobnicate\n"),
            Err(IoError::Parse { .. })
        ));
    }
}
