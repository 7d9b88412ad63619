//! `harness.c`: reads a stimulus file, steps the root component and prints
//! the trace in the simulator's line format.
//!
//! The stimulus is read twice, once to validate every line and count the
//! ticks, once to run, so that a malformed file produces no trace at all.
//! Only non-variadic stdio calls are used.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::model::ir::{Port, Program};
use crate::model::types::{NominalKind, Ty, INT_MAX, INT_MIN};

use super::emit::{ctor_const, ident, int_lit};
use super::{ports_bytes, state_bytes, GeneratedUnit, UnitKind};

fn collect(p: &Program, ty: Ty, out: &mut BTreeSet<u32>, ints: &mut bool, bools: &mut bool) {
    match ty {
        Ty::Bool => *bools = true,
        Ty::Int { .. } => *ints = true,
        Ty::Named(id) => {
            if !out.insert(id) {
                return;
            }
            let fields: Vec<Ty> = match &p.types.get(id).kind {
                NominalKind::Enum(_) => Vec::new(),
                NominalKind::Record(fs) => fs.iter().map(|f| f.ty).collect(),
                NominalKind::Variant(cs) => cs.iter().flat_map(|c| c.fields.iter().copied()).collect(),
            };
            for f in fields {
                collect(p, f, out, ints, bools);
            }
        }
    }
}

#[derive(Default)]
struct Needs {
    named: BTreeSet<u32>,
    ints: bool,
    bools: bool,
}

fn needs(p: &Program, ports: &[&Port]) -> Needs {
    let mut n = Needs::default();
    for port in ports {
        collect(p, port.ty, &mut n.named, &mut n.ints, &mut n.bools);
    }
    n
}

/// Named types in an order where field types come first.
fn ordered(p: &Program, set: &BTreeSet<u32>) -> Vec<u32> {
    fn visit(p: &Program, id: u32, set: &BTreeSet<u32>, done: &mut BTreeSet<u32>, out: &mut Vec<u32>) {
        if !set.contains(&id) || !done.insert(id) {
            return;
        }
        let fields: Vec<Ty> = match &p.types.get(id).kind {
            NominalKind::Enum(_) => Vec::new(),
            NominalKind::Record(fs) => fs.iter().map(|f| f.ty).collect(),
            NominalKind::Variant(cs) => cs.iter().flat_map(|c| c.fields.iter().copied()).collect(),
        };
        for f in fields {
            if let Ty::Named(d) = f {
                visit(p, d, set, done, out);
            }
        }
        out.push(id);
    }
    let mut done = BTreeSet::new();
    let mut out = Vec::new();
    for &id in set {
        visit(p, id, set, &mut done, &mut out);
    }
    out
}

/// Statement parsing a value of `ty` from cursor `c` into lvalue `dst`,
/// returning 0 from the enclosing function on failure.
fn parse_call(p: &Program, ty: Ty, c: &str, dst: &str) -> String {
    match ty {
        Ty::Bool => format!("if (!parse_bool({c}, &{dst})) return 0;"),
        Ty::Int { lo, hi } => format!(
            "if (!parse_int({c}, &{dst}, {}, {})) return 0;",
            int_lit(lo.max(INT_MIN)),
            int_lit(hi.min(INT_MAX))
        ),
        Ty::Named(id) => format!("if (!parse_{}({c}, &{dst})) return 0;", p.types.get(id).name),
    }
}

fn print_call(p: &Program, ty: Ty, v: &str) -> String {
    match ty {
        Ty::Bool => format!("put_bool({v});"),
        Ty::Int { .. } => format!("put_int({v});"),
        Ty::Named(id) => format!("print_{}({v});", p.types.get(id).name),
    }
}

const CURSOR: &str = r#"typedef struct {
    char buf[SYN_MAX_LINE];
    int32_t len;
    int32_t pos;
} Cursor;

typedef struct {
    char s[SYN_MAX_WORD];
    int32_t len;
} Word;

static int32_t peek(const Cursor *c)
{
    if (c->pos >= c->len) return -1;
    return (int32_t)(unsigned char)c->buf[c->pos];
}

static void skip_ws(Cursor *c)
{
    int32_t i;
    for (i = 0; i < SYN_MAX_LINE; i++) {
        if (peek(c) != ' ' && peek(c) != '\t') break;
        c->pos++;
    }
}

static int32_t at_end(Cursor *c)
{
    skip_ws(c);
    return c->pos == c->len;
}

static int32_t sym(Cursor *c, int32_t ch)
{
    skip_ws(c);
    if (peek(c) != ch) return 0;
    c->pos++;
    return 1;
}

static int32_t word_is(const Word *w, const char *lit)
{
    int32_t i;
    for (i = 0; i < SYN_MAX_WORD; i++) {
        if (w->s[i] != lit[i]) return 0;
        if (lit[i] == 0) return 1;
    }
    return 0;
}

static void put_int(int64_t v)
{
    char d[24];
    int32_t n = 0;
    int32_t i;
    int64_t x = v;
    if (x < 0) {
        putchar('-');
        x = -x;
    }
    for (i = 0; i < 20; i++) {
        d[n] = (char)('0' + (int32_t)(x % 10));
        n++;
        x = x / 10;
        if (x == 0) break;
    }
    for (i = 0; i < 24; i++) {
        if (n == 0) break;
        n--;
        putchar(d[n]);
    }
}
"#;

const WORD: &str = r#"
static int32_t ident_char(int32_t ch, int32_t first)
{
    if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch == '_') return 1;
    return !first && ch >= '0' && ch <= '9';
}

static int32_t read_word(Cursor *c, Word *w)
{
    int32_t i;
    skip_ws(c);
    w->len = 0;
    for (i = 0; i < SYN_MAX_WORD - 1; i++) {
        if (!ident_char(peek(c), i == 0)) break;
        w->s[w->len] = (char)peek(c);
        w->len++;
        c->pos++;
    }
    w->s[w->len] = 0;
    if (ident_char(peek(c), 0)) return 0;
    return w->len > 0;
}

/* Optional empty argument list after a constructor without fields. */
static int32_t no_args(Cursor *c)
{
    if (!sym(c, '(')) return 1;
    return sym(c, ')');
}
"#;

const BOOL: &str = r#"
static int32_t parse_bool(Cursor *c, syn_bool *v)
{
    Word w;
    if (!read_word(c, &w)) return 0;
    if (word_is(&w, "true")) {
        *v = 1;
        return 1;
    }
    if (word_is(&w, "false")) {
        *v = 0;
        return 1;
    }
    return 0;
}
"#;

const INT: &str = r#"
static int32_t parse_int(Cursor *c, syn_int *v, int64_t lo, int64_t hi)
{
    int32_t i;
    int32_t digits = 0;
    int32_t neg = 0;
    int64_t x = 0;
    skip_ws(c);
    if (peek(c) == '-') {
        neg = 1;
        c->pos++;
        skip_ws(c);
    }
    for (i = 0; i < SYN_MAX_LINE; i++) {
        if (peek(c) < '0' || peek(c) > '9') break;
        if (x > 100000000000LL) return 0;
        x = x * 10 + (peek(c) - '0');
        digits++;
        c->pos++;
    }
    if (digits == 0) return 0;
    if (neg) x = -x;
    if (x < lo || x > hi) return 0;
    *v = (syn_int)x;
    return 1;
}
"#;

const PRINT_BOOL: &str = r#"
static void put_bool(syn_bool v)
{
    fputs(v ? "true" : "false", stdout);
}
"#;

fn parse_fn(p: &Program, id: u32) -> String {
    let t = p.types.get(id);
    let n = ident(&t.name);
    let mut s = format!("\nstatic int32_t parse_{}(Cursor *c, {n} *v)\n{{\n", t.name);
    match &t.kind {
        NominalKind::Enum(cs) => {
            s.push_str("    Word w;\n    if (!read_word(c, &w)) return 0;\n");
            for (tag, c) in cs.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "    if (word_is(&w, \"{c}\")) {{\n        *v = {};\n        return no_args(c);\n    }}",
                    ctor_const(p, id, tag as u32)
                );
            }
            s.push_str("    return 0;\n");
        }
        NominalKind::Variant(cs) => {
            let _ = writeln!(s, "    {n} r = {{0}};\n    Word w;\n    if (!read_word(c, &w)) return 0;");
            for (tag, ctor) in cs.iter().enumerate() {
                let _ = writeln!(s, "    if (word_is(&w, \"{}\")) {{", ctor.name);
                let _ = writeln!(s, "        r.tag = {};", ctor_const(p, id, tag as u32));
                if ctor.fields.is_empty() {
                    s.push_str("        if (!no_args(c)) return 0;\n");
                } else {
                    s.push_str("        if (!sym(c, '(')) return 0;\n");
                    let last = ctor.fields.len() - 1;
                    for (k, f) in ctor.fields.iter().enumerate() {
                        let dst = format!("r.{}.f{k}", ident(&ctor.name));
                        let _ = writeln!(s, "        {}", parse_call(p, *f, "c", &dst));
                        if k < last {
                            s.push_str("        if (!sym(c, ',')) return 0;\n");
                        } else {
                            s.push_str("        sym(c, ',');\n        if (!sym(c, ')')) return 0;\n");
                        }
                    }
                }
                s.push_str("        *v = r;\n        return 1;\n    }\n");
            }
            s.push_str("    return 0;\n");
        }
        NominalKind::Record(fs) => {
            let _ = writeln!(s, "    {n} r = {{0}};");
            if !fs.is_empty() {
                s.push_str("    Word w;\n");
            }
            s.push_str("    if (!sym(c, '{')) return 0;\n");
            let last = fs.len().saturating_sub(1);
            for (k, f) in fs.iter().enumerate() {
                let _ = writeln!(s, "    if (!read_word(c, &w) || !word_is(&w, \"{}\")) return 0;", f.name);
                s.push_str("    if (!sym(c, '=')) return 0;\n");
                let _ = writeln!(s, "    {}", parse_call(p, f.ty, "c", &format!("r.{}", ident(&f.name))));
                if k < last {
                    s.push_str("    if (!sym(c, ',')) return 0;\n");
                } else {
                    s.push_str("    sym(c, ',');\n");
                }
            }
            s.push_str("    if (!sym(c, '}')) return 0;\n    *v = r;\n    return 1;\n");
        }
    }
    s.push_str("}\n");
    s
}

fn print_fn(p: &Program, id: u32) -> String {
    let t = p.types.get(id);
    let n = ident(&t.name);
    let mut s = format!("\nstatic void print_{}({n} v)\n{{\n", t.name);
    match &t.kind {
        NominalKind::Enum(cs) => {
            for (tag, c) in cs.iter().enumerate() {
                let _ = writeln!(s, "    if (v == {}) fputs(\"{c}\", stdout);", ctor_const(p, id, tag as u32));
            }
        }
        NominalKind::Variant(cs) => {
            for (tag, c) in cs.iter().enumerate() {
                let _ = writeln!(s, "    if (v.tag == {}) {{", ctor_const(p, id, tag as u32));
                let _ = writeln!(s, "        fputs(\"{}\", stdout);", c.name);
                if !c.fields.is_empty() {
                    s.push_str("        putchar('(');\n");
                    for (k, f) in c.fields.iter().enumerate() {
                        if k > 0 {
                            s.push_str("        putchar(',');\n");
                        }
                        let _ = writeln!(s, "        {}", print_call(p, *f, &format!("v.{}.f{k}", ident(&c.name))));
                    }
                    s.push_str("        putchar(')');\n");
                }
                s.push_str("    }\n");
            }
        }
        NominalKind::Record(fs) => {
            s.push_str("    putchar('{');\n");
            for (k, f) in fs.iter().enumerate() {
                let sep = if k > 0 { "," } else { "" };
                let _ = writeln!(s, "    fputs(\"{sep}{}=\", stdout);", f.name);
                let _ = writeln!(s, "    {}", print_call(p, f.ty, &format!("v.{}", ident(&f.name))));
            }
            if fs.is_empty() {
                s.push_str("    (void)v;\n");
            }
            s.push_str("    putchar('}');\n");
        }
    }
    s.push_str("}\n");
    s
}

const IO: &str = r#"
/* 1: a line, 0: end of file, -1: line too long. */
static int32_t read_line(FILE *f, Cursor *c)
{
    int32_t i;
    c->len = 0;
    c->pos = 0;
    for (i = 0; i < SYN_MAX_LINE; i++) {
        int ch = fgetc(f);
        if (ch == EOF) return i > 0;
        if (ch == '\n') {
            if (c->len > 0 && c->buf[c->len - 1] == '\r') c->len--;
            return 1;
        }
        if (c->len >= SYN_MAX_LINE - 1) return -1;
        c->buf[c->len] = (char)ch;
        c->len++;
    }
    return -1;
}

static int32_t blank(const Cursor *c)
{
    int32_t i;
    for (i = 0; i < SYN_MAX_LINE; i++) {
        if (i >= c->len) break;
        if (c->buf[i] != ' ' && c->buf[i] != '\t' && c->buf[i] != '\r' && c->buf[i] != '\v' && c->buf[i] != '\f') return 0;
    }
    return 1;
}

static const char *error_name(int32_t e)
{
    if (e == SYN_DIVISION_BY_ZERO) return "DivisionByZero";
    if (e == SYN_RANGE_VIOLATION) return "RangeViolation";
    if (e == SYN_MATCH_FAILURE) return "MatchFailure";
    return "Unknown";
}
"#;

fn parse_row(p: &Program) -> String {
    let root = p.root();
    let rn = &root.name;
    let nin = root.inputs.len();
    let mut s = String::new();
    let _ = writeln!(s, "\nstatic int32_t parse_row(Cursor *line, int64_t tick, {rn}_in *in)\n{{");
    let _ = writeln!(s, "    syn_bool seen[{}] = {{0}};", nin + 1);
    s.push_str(
        r#"    Cursor cell;
    Word name;
    int32_t i;
    int32_t k;
    int32_t digits = 0;
    int64_t t = 0;
    if (peek(line) == '+') line->pos++;
    for (i = 0; i < SYN_MAX_LINE; i++) {
        if (peek(line) < '0' || peek(line) > '9') break;
        if (t > 100000000000LL) return 0;
        t = t * 10 + (peek(line) - '0');
        digits++;
        line->pos++;
    }
    if (digits == 0 || t != tick) return 0;
    for (k = 0; k < SYN_MAX_LINE; k++) {
        if (line->pos >= line->len) break;
        if (peek(line) != ';') return 0;
        line->pos++;
        name.len = 0;
        for (i = 0; i < SYN_MAX_LINE; i++) {
            if (peek(line) == '=' || peek(line) < 0) break;
            if (name.len >= SYN_MAX_WORD - 1) return 0;
            name.s[name.len] = (char)peek(line);
            name.len++;
            line->pos++;
        }
        name.s[name.len] = 0;
        if (peek(line) != '=') return 0;
        line->pos++;
        cell.len = 0;
        cell.pos = 0;
        for (i = 0; i < SYN_MAX_LINE; i++) {
            if (peek(line) == ';' || peek(line) < 0) break;
            cell.buf[cell.len] = (char)peek(line);
            cell.len++;
            line->pos++;
        }
"#,
    );
    for (i, port) in root.inputs.iter().enumerate() {
        let pn = ident(&port.name);
        let head = if i == 0 { "        if" } else { "        } else if" };
        let _ = writeln!(s, "{head} (word_is(&name, \"{}\")) {{", port.name);
        let _ = writeln!(s, "            if (seen[{i}]) return 0;\n            seen[{i}] = 1;");
        let _ = writeln!(s, "            if (cell.len == 1 && cell.buf[0] == '-') {{\n                in->{pn}.present = 0;\n            }} else {{");
        let _ = writeln!(s, "                {}", parse_call(p, port.ty, "&cell", &format!("in->{pn}.value")));
        let _ = writeln!(s, "                if (!at_end(&cell)) return 0;\n                in->{pn}.present = 1;\n            }}");
    }
    if nin == 0 {
        s.push_str("        return 0;\n");
    } else {
        s.push_str("        } else {\n            return 0;\n        }\n");
    }
    s.push_str("    }\n");
    let _ = writeln!(s, "    for (i = 0; i < {nin}; i++) {{\n        if (!seen[i]) return 0;\n    }}");
    if nin == 0 {
        s.push_str("    (void)in;\n    (void)cell;\n    (void)name;\n");
    }
    s.push_str("    return 1;\n}\n");
    s
}

fn print_row(p: &Program) -> String {
    let root = p.root();
    let rn = &root.name;
    let mut s = format!("\nstatic void print_row(int64_t tick, const {rn}_in *in, const {rn}_out *out)\n{{\n    put_int(tick);\n");
    let cells = root.inputs.iter().map(|x| ("in", x)).chain(root.outputs.iter().map(|x| ("out", x)));
    for (agg, port) in cells {
        let pn = ident(&port.name);
        let _ = writeln!(s, "    fputs(\";{}=\", stdout);", port.name);
        let _ = writeln!(
            s,
            "    if ({agg}->{pn}.present) {{\n        {}\n    }} else {{\n        putchar('-');\n    }}",
            print_call(p, port.ty, &format!("{agg}->{pn}.value"))
        );
    }
    if root.inputs.is_empty() {
        s.push_str("    (void)in;\n");
    }
    if root.outputs.is_empty() {
        s.push_str("    (void)out;\n");
    }
    s.push_str("    putchar('\\n');\n}\n");
    s
}

fn main_fn(p: &Program) -> String {
    let rn = &p.root().name;
    format!(
        r#"
int main(int argc, char **argv)
{{
    static Cursor line;
    static {rn}_state st;
    {rn}_in in;
    {rn}_out out;
    FILE *f;
    int64_t ticks = 0;
    int64_t rows = 0;
    int64_t t = 0;
    int64_t k;
    int32_t i;
    int32_t r;
    int32_t e;
    if (argc != 3) {{
        fputs("usage: harness <stimulus-file> <ticks>\n", stderr);
        return 2;
    }}
    for (i = 0; i < 20; i++) {{
        if (argv[2][i] == 0) break;
        if (argv[2][i] < '0' || argv[2][i] > '9') {{
            fputs("harness: ticks must be a non-negative number\n", stderr);
            return 2;
        }}
        ticks = ticks * 10 + (argv[2][i] - '0');
    }}
    if (i == 0 || i == 20) {{
        fputs("harness: ticks must be a non-negative number\n", stderr);
        return 2;
    }}
    f = fopen(argv[1], "r");
    if (f == NULL) {{
        fputs("harness: cannot open the stimulus file\n", stderr);
        return 2;
    }}
    for (k = 0; k < SYN_MAX_LINES; k++) {{
        r = read_line(f, &line);
        if (r == 0) break;
        if (r < 0 || (!blank(&line) && !parse_row(&line, rows, &in))) {{
            fputs("harness: malformed stimulus line ", stderr);
            put_line_number(k + 1);
            fclose(f);
            return 2;
        }}
        if (!blank(&line)) rows++;
    }}
    if (ticks > rows) {{
        fputs("harness: the stimulus is shorter than the requested ticks\n", stderr);
        fclose(f);
        return 2;
    }}
    rewind(f);
    {rn}_init(&st);
    for (k = 0; k < SYN_MAX_LINES; k++) {{
        if (t >= ticks) break;
        r = read_line(f, &line);
        if (r <= 0) break;
        if (blank(&line)) continue;
        parse_row(&line, t, &in);
        e = {rn}_step(&st, &in, &out);
        if (e != SYN_OK) {{
            put_int(t);
            fputs(";error=", stdout);
            fputs(error_name(e), stdout);
            putchar('\n');
            fputs("harness: evaluation error: ", stderr);
            fputs(error_name(e), stderr);
            fputs("\n", stderr);
            fclose(f);
            return 1;
        }}
        print_row(t, &in, &out);
        t++;
    }}
    fclose(f);
    return 0;
}}
"#
    )
}

const LINE_NO: &str = r#"
static void put_line_number(int64_t n)
{
    char d[24];
    int32_t c = 0;
    int32_t i;
    int64_t x = n;
    for (i = 0; i < 20; i++) {
        d[c] = (char)('0' + (int32_t)(x % 10));
        c++;
        x = x / 10;
        if (x == 0) break;
    }
    for (i = 0; i < 24; i++) {
        if (c == 0) break;
        c--;
        fputc(d[c], stderr);
    }
    fputc('\n', stderr);
}
"#;

pub fn generate_harness(p: &Program) -> GeneratedUnit {
    let root = p.root();
    let rn = &root.name;
    let state = state_bytes(p);
    let in_bytes = ports_bytes(p, &root.inputs);
    let out_bytes = ports_bytes(p, &root.outputs);
    let parse_needs = needs(p, &root.inputs.iter().collect::<Vec<_>>());
    let print_needs = needs(p, &root.inputs.iter().chain(&root.outputs).collect::<Vec<_>>());

    let mut s = String::new();
    let _ = writeln!(s, "/* Test harness of model {}: harness <stimulus-file> <ticks>. Generated code, do not edit. */", p.name);
    let _ = writeln!(
        s,
        "/* Static storage: state {state} bytes, inputs {in_bytes} bytes, outputs {out_bytes} bytes,\n   line buffer {} bytes. There is no dynamic allocation. */\n",
        4096 + 8
    );
    let _ = writeln!(s, "#include <stdio.h>\n#include <stdint.h>\n#include \"types.h\"\n#include \"{rn}.h\"\n");
    s.push_str("#define SYN_MAX_LINE 4096\n#define SYN_MAX_WORD 128\n#define SYN_MAX_LINES 1000000000\n");
    let _ = writeln!(s, "#define SYN_STATE_BYTES {state}\n#define SYN_STORAGE_BYTES {}\n", state + in_bytes + out_bytes);
    let _ = writeln!(
        s,
        "typedef char syn_storage_check[(sizeof({rn}_state) == SYN_STATE_BYTES && sizeof({rn}_state) + sizeof({rn}_in) + sizeof({rn}_out) == SYN_STORAGE_BYTES) ? 1 : -1];\n"
    );
    s.push_str(CURSOR);
    let uses_words = parse_needs.bools || !parse_needs.named.is_empty();
    if uses_words {
        s.push_str(WORD);
    }
    if parse_needs.bools {
        s.push_str(BOOL);
    }
    if parse_needs.ints {
        s.push_str(INT);
    }
    for id in ordered(p, &parse_needs.named) {
        s.push_str(&parse_fn(p, id));
    }
    if print_needs.bools {
        s.push_str(PRINT_BOOL);
    }
    for id in ordered(p, &print_needs.named) {
        s.push_str(&print_fn(p, id));
    }
    s.push_str(IO);
    s.push_str(LINE_NO);
    s.push_str(&parse_row(p));
    s.push_str(&print_row(p));
    s.push_str(&main_fn(p));
    GeneratedUnit {
        file_name: "harness.c".into(),
        contents: s,
        kind: UnitKind::Harness,
    }
}
