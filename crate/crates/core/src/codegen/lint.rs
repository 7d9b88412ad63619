//! Token-level self-check of generated C against the emission subset.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::check::{Category, CheckReport, Finding, Severity};
use crate::model::ast::Pos;

use super::GeneratedUnit;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Kind {
    Ident,
    Number,
    Str,
    Punct,
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    text: String,
    pos: Pos,
}

const PUNCTS: [&str; 23] = [
    "...", "<<=", ">>=", "->", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "<=", ">=", "==",
    "!=", "&&", "||", "##",
];

fn tokenize(src: &str) -> Vec<Token> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let mut line_start = true;
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars.get(*i) == Some(&'\n') {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line_start = true;
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if line_start && c == '#' {
            // Preprocessor line, with backslash continuations.
            while i < chars.len() && chars[i] != '\n' {
                let n = if chars[i] == '\\' && chars.get(i + 1) == Some(&'\n') { 2 } else { 1 };
                advance(&mut i, &mut line, &mut col, n);
            }
            continue;
        }
        line_start = false;
        let pos = Pos { line, col };
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, 2);
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                advance(&mut i, &mut line, &mut col, 1);
            }
            advance(&mut i, &mut line, &mut col, 2);
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            Kind::Ident
        } else if c.is_ascii_digit() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            Kind::Number
        } else if c == '"' || c == '\'' {
            advance(&mut i, &mut line, &mut col, 1);
            while i < chars.len() && chars[i] != c && chars[i] != '\n' {
                let n = if chars[i] == '\\' { 2 } else { 1 };
                advance(&mut i, &mut line, &mut col, n);
            }
            advance(&mut i, &mut line, &mut col, 1);
            Kind::Str
        } else {
            let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
            let n = PUNCTS.iter().find(|p| rest.starts_with(*p)).map_or(1, |p| p.len());
            advance(&mut i, &mut line, &mut col, n);
            Kind::Punct
        };
        toks.push(Token {
            kind,
            text: chars[start..i.min(chars.len())].iter().collect(),
            pos,
        });
    }
    toks
}

const ALLOCATION: [&str; 6] = ["malloc", "calloc", "realloc", "free", "alloca", "aligned_alloc"];

const VARIADIC: [&str; 18] = [
    "printf", "fprintf", "sprintf", "snprintf", "vprintf", "vfprintf", "vsprintf", "vsnprintf", "scanf", "fscanf",
    "sscanf", "vscanf", "vfscanf", "vsscanf", "va_start", "va_arg", "va_end", "va_copy",
];

const CONTROL: [&str; 7] = ["if", "for", "while", "switch", "return", "sizeof", "do"];

const BUILTIN_TYPES: [&str; 16] = [
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "const", "int32_t", "int64_t",
    "uint32_t", "uint8_t", "FILE", "size_t",
];

struct Scan<'a> {
    file: &'a str,
    toks: Vec<Token>,
    findings: Vec<Finding>,
    types: BTreeSet<String>,
}

impl<'a> Scan<'a> {
    fn text(&self, i: usize) -> &str {
        self.toks.get(i).map_or("", |t| t.text.as_str())
    }

    fn is_ident(&self, i: usize) -> bool {
        self.toks.get(i).is_some_and(|t| t.kind == Kind::Ident)
    }

    fn report(&mut self, code: &'static str, i: usize, message: String) {
        self.findings.push(Finding {
            severity: Severity::Error,
            code,
            path: self.file.to_string(),
            pos: self.toks[i].pos,
            message,
            category: Category::Subset,
        });
    }

    fn is_type(&self, i: usize) -> bool {
        let t = self.text(i);
        BUILTIN_TYPES.contains(&t) || self.types.contains(t)
    }

    /// Whether the token at `i` starts an operand, so that a following
    /// `*`/`&` is binary.
    fn ends_operand(&self, i: usize) -> bool {
        match self.toks.get(i) {
            Some(t) => match t.kind {
                Kind::Number | Kind::Str => true,
                Kind::Ident => !CONTROL.contains(&t.text.as_str()) && !self.is_type(i),
                Kind::Punct => t.text == ")" || t.text == "]",
            },
            None => false,
        }
    }

    fn collect_typedefs(&mut self) {
        let mut i = 0;
        while i < self.toks.len() {
            if self.text(i) == "struct" && self.is_ident(i + 1) {
                let name = self.text(i + 1).to_string();
                self.types.insert(name);
            }
            if self.text(i) == "typedef" {
                let mut depth = 0i32;
                let mut last = None;
                let mut j = i + 1;
                while j < self.toks.len() {
                    match self.text(j) {
                        "{" | "(" | "[" => depth += 1,
                        "}" | ")" | "]" => depth -= 1,
                        ";" if depth == 0 => break,
                        _ if depth == 0 && self.is_ident(j) => last = Some(j),
                        _ => {}
                    }
                    j += 1;
                }
                if let Some(l) = last {
                    let name = self.text(l).to_string();
                    self.types.insert(name);
                }
                i = j;
            }
            i += 1;
        }
    }

    fn canonical_for(&self, i: usize) -> bool {
        // for ( v = <const> ; v < <bound> ; v ++ )
        let t = |k: usize| self.text(i + k);
        if t(1) != "(" || !self.is_ident(i + 2) || t(3) != "=" {
            return false;
        }
        let v = t(2);
        let mut k = 4;
        if t(k) == "-" {
            k += 1;
        }
        if !self.toks.get(i + k).is_some_and(|x| x.kind == Kind::Number) || t(k + 1) != ";" {
            return false;
        }
        k += 2;
        if t(k) != v || !matches!(t(k + 1), "<" | "<=") {
            return false;
        }
        k += 2;
        let mut operands = 0;
        loop {
            let tok = &self.toks[(i + k).min(self.toks.len() - 1)];
            let constant = tok.kind == Kind::Number
                || (tok.kind == Kind::Ident && tok.text.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_'));
            if !constant {
                return false;
            }
            operands += 1;
            k += 1;
            if matches!(t(k), "+" | "-") {
                k += 1;
                continue;
            }
            break;
        }
        operands > 0 && t(k) == ";" && t(k + 1) == v && t(k + 2) == "++" && t(k + 3) == ")"
    }

    /// Index after an `ident ((-> | .) ident)*` chain starting at `i`.
    fn member_chain(&self, mut i: usize) -> Option<usize> {
        if !self.is_ident(i) {
            return None;
        }
        i += 1;
        while matches!(self.text(i), "->" | ".") && self.is_ident(i + 1) {
            i += 2;
        }
        Some(i)
    }

    fn scan(&mut self) -> Vec<(String, Pos, Vec<String>)> {
        let mut funcs: Vec<(String, Pos, Vec<String>)> = Vec::new();
        let mut depth = 0i32;
        let mut pointers: BTreeSet<String> = BTreeSet::new();
        let mut pending: Option<(String, Pos)> = None;
        for i in 0..self.toks.len() {
            let text = self.text(i).to_string();
            let kind = self.toks[i].kind.clone();
            match text.as_str() {
                "{" => {
                    if depth == 0 {
                        if let Some((name, pos)) = pending.take() {
                            funcs.push((name, pos, Vec::new()));
                        }
                    }
                    depth += 1;
                }
                "}" => {
                    depth -= 1;
                    if depth == 0 {
                        pointers.clear();
                    }
                }
                ";" if depth == 0 => pending = None,
                _ => {}
            }
            if kind == Kind::Ident {
                if ALLOCATION.contains(&text.as_str()) {
                    self.report("ForbiddenConstruct", i, format!("heap allocation call `{text}`"));
                } else if VARIADIC.contains(&text.as_str()) {
                    self.report("ForbiddenConstruct", i, format!("variadic call `{text}`"));
                } else if matches!(text.as_str(), "while" | "do" | "goto") {
                    self.report("ForbiddenConstruct", i, format!("`{text}` is not a fixed-bound construct"));
                } else if text == "for" && !self.canonical_for(i) {
                    self.report("ForbiddenConstruct", i, "loop header is not of the form `for (i = c; i < BOUND; i++)`".into());
                } else if self.text(i + 1) == "(" && !CONTROL.contains(&text.as_str()) && !self.is_type(i) {
                    if depth == 0 {
                        pending = Some((text.clone(), self.toks[i].pos));
                    } else if let Some(f) = funcs.last_mut() {
                        f.2.push(text.clone());
                    }
                } else if pointers.contains(&text) && !matches!(self.text(i + 1), "->" | "[") {
                    let arith = |s: &str| matches!(s, "+" | "-" | "++" | "--" | "+=" | "-=");
                    let before = i > 0 && arith(self.text(i - 1));
                    if before || arith(self.text(i + 1)) {
                        self.report("ForbiddenConstruct", i, format!("address arithmetic on pointer `{text}`"));
                    }
                }
            }
            match text.as_str() {
                "..." => self.report("ForbiddenConstruct", i, "variadic parameter list".into()),
                "*" => {
                    if i > 0 && self.is_type(i - 1) {
                        let mut j = i;
                        while self.text(j) == "*" {
                            j += 1;
                        }
                        if self.is_ident(j) && matches!(self.text(j + 1), "," | ")" | ";" | "=" | "[") {
                            pointers.insert(self.text(j).to_string());
                        }
                    } else if (i == 0 || !self.ends_operand(i - 1)) && self.text(i - 1) != "*" && !self.is_ident(i + 1) {
                        self.report("ForbiddenConstruct", i, "dereference of a computed address".into());
                    }
                }
                "&" if i == 0 || !self.ends_operand(i - 1) => {
                    let ok = self.member_chain(i + 1).is_some_and(|j| matches!(self.text(j), "," | ")" | ";"));
                    if !ok {
                        self.report("ForbiddenConstruct", i, "address-of outside a plain object reference".into());
                    }
                }
                _ => {}
            }
        }
        funcs
    }
}

/// Scans `units` for constructs outside the emission subset: allocation,
/// variadic calls, unbounded loops, address arithmetic and recursion (over
/// the call graph of all units together).
pub fn lint_subset(units: &[GeneratedUnit]) -> CheckReport {
    let mut report = CheckReport::default();
    let mut defs: BTreeMap<String, (String, Pos)> = BTreeMap::new();
    let mut calls: Vec<(String, String)> = Vec::new();
    let units: Vec<&GeneratedUnit> = units
        .iter()
        .filter(|u| u.file_name.ends_with(".c") || u.file_name.ends_with(".h"))
        .collect();
    // Type names are shared through headers, so collect them over all units.
    let mut types = BTreeSet::new();
    let streams: Vec<Vec<Token>> = units.iter().map(|u| tokenize(&u.contents)).collect();
    for toks in &streams {
        let mut scan = Scan {
            file: "",
            toks: toks.clone(),
            findings: Vec::new(),
            types: BTreeSet::new(),
        };
        scan.collect_typedefs();
        types.append(&mut scan.types);
    }
    for (u, toks) in units.iter().zip(streams) {
        let mut scan = Scan {
            file: &u.file_name,
            toks,
            findings: Vec::new(),
            types: types.clone(),
        };
        for (name, pos, callees) in scan.scan() {
            for c in callees {
                calls.push((name.clone(), c));
            }
            defs.entry(name).or_insert((u.file_name.clone(), pos));
        }
        // One finding per offending line.
        let mut seen = BTreeSet::new();
        report
            .findings
            .extend(scan.findings.into_iter().filter(|f| seen.insert((f.pos.line, f.code))));
    }

    let mut graph: DiGraph<String, ()> = DiGraph::new();
    let nodes: BTreeMap<&String, NodeIndex> = defs.keys().map(|n| (n, graph.add_node(n.clone()))).collect();
    for (from, to) in &calls {
        if let (Some(&a), Some(&b)) = (nodes.get(from), nodes.get(to)) {
            graph.update_edge(a, b, ());
        }
    }
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if !cyclic {
            continue;
        }
        let mut names: Vec<&String> = scc.iter().map(|n| &graph[*n]).collect();
        names.sort();
        let (file, pos) = &defs[names[0]];
        report.findings.push(Finding {
            severity: Severity::Error,
            code: "RecursionDetected",
            path: file.clone(),
            pos: *pos,
            message: format!(
                "call cycle through {}",
                names.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", ")
            ),
            category: Category::Subset,
        });
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codegen::UnitKind;

    fn unit(src: &str) -> Vec<GeneratedUnit> {
        vec![GeneratedUnit {
            file_name: "t.c".into(),
            contents: src.into(),
            kind: UnitKind::ComponentStep,
        }]
    }

    fn codes(src: &str) -> Vec<&'static str> {
        lint_subset(&unit(src)).findings.iter().map(|f| f.code).collect()
    }

    #[test]
    fn clean_code_has_no_findings() {
        let src = "#include <stdio.h>\n#define N 4\ntypedef struct { int32_t a; } S;\n\
                   static int32_t g(S *s, int32_t *out)\n{\n    int32_t i;\n    /* while */\n    for (i = 0; i < N - 1; i++) {\n        s->a = s->a * 2 + i;\n    }\n    *out = s->a & 3;\n    fputs(\"do while\", stdout);\n    return 0;\n}\n\
                   int32_t h(void)\n{\n    S s = {0};\n    int32_t r = 0;\n    return g(&s, &r) + r;\n}\n";
        assert_eq!(codes(src), Vec::<&str>::new());
    }

    #[test]
    fn forbidden_constructs_are_reported_once() {
        let cases = [
            "void f(void)\n{\n    char *p = malloc(4);\n}\n",
            "void f(int32_t n)\n{\n    printf(\"%d\", n);\n}\n",
            "void f(int32_t n)\n{\n    while (n) n--;\n}\n",
            "void f(int32_t n)\n{\n    int32_t i;\n    for (i = 0; i < n; i++) {}\n}\n",
            "void f(int32_t *p)\n{\n    p++;\n}\n",
            "void f(int32_t *p, int32_t x)\n{\n    x = *(p + 1);\n}\n",
            "void f(int32_t a[4], int32_t *q)\n{\n    q = &a[2];\n}\n",
            "void f(int32_t n, ...)\n{\n}\n",
        ];
        for c in cases {
            let found = codes(c);
            assert_eq!(found, vec!["ForbiddenConstruct"], "{c}");
        }
    }

    #[test]
    fn recursion_is_detected_across_functions() {
        let direct = "int32_t f(int32_t n)\n{\n    return n + f(n);\n}\n";
        assert_eq!(codes(direct), vec!["RecursionDetected"]);
        let mutual = "int32_t g(int32_t n);\nint32_t f(int32_t n)\n{\n    return g(n);\n}\nint32_t g(int32_t n)\n{\n    return f(n);\n}\n";
        let r = lint_subset(&unit(mutual));
        assert_eq!(r.findings.len(), 1);
        assert!(r.findings[0].message.contains("`f`, `g`"));
        assert_eq!((r.findings[0].pos.line, r.findings[0].pos.col), (2, 9));
    }
}
