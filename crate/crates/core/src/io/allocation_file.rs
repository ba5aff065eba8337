//! Allocation files: one line per agent, `i: o_a o_b ...`, 0-based indices.
//! Items may also be given by name when the instance names them. Agents
//! without a line get an empty bundle; `#` starts a comment.

use std::fmt::Write as _;

use crate::error::IoError;
use crate::model::{Allocation, Instance};

pub fn parse_allocation(text: &str, instance: &Instance) -> Result<Allocation, IoError> {
    let mut p = Allocation::empty(instance.n());
    let mut seen = vec![false; instance.n()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let (head, items) = content
            .split_once(':')
            .ok_or_else(|| IoError::parse(line, 1, "expected `agent: items`"))?;
        let agent: usize = head
            .trim()
            .parse()
            .map_err(|_| IoError::parse(line, 1, format!("bad agent index `{}`", head.trim())))?;
        if agent >= instance.n() {
            return Err(IoError::parse(
                line,
                1,
                format!("agent {agent} out of range (0..{})", instance.n()),
            ));
        }
        if std::mem::replace(&mut seen[agent], true) {
            return Err(IoError::parse(
                line,
                1,
                format!("agent {agent} listed twice"),
            ));
        }
        for token in items.split_whitespace() {
            let column = raw.find(token).map_or(1, |c| c + 1);
            let item = token
                .parse::<usize>()
                .ok()
                .filter(|&o| o < instance.m())
                .or_else(|| instance.item_names().iter().position(|name| name == token))
                .ok_or_else(|| IoError::parse(line, column, format!("unknown item `{token}`")))?;
            if !p.assign(agent, item) {
                return Err(IoError::parse(
                    line,
                    column,
                    format!("item {item} listed twice for agent {agent}"),
                ));
            }
        }
    }
    Ok(p)
}

pub fn format_allocation(allocation: &Allocation) -> String {
    let mut out = String::new();
    for (i, bundle) in allocation.bundles().iter().enumerate() {
        let items: Vec<String> = bundle.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{i}: {}", items.join(" "));
    }
    out
}
