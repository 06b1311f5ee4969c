//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use rimay_core::analytics::{build_report, pairwise_ztests, saturation, ztest, CorpusReport, ZTestInput};
use rimay_core::assist::{complete, CompletionKind, CompletionRequest};
use rimay_core::lexicon::{Lexicon, Role};
use rimay_core::parser::{
    classify_failure, parse_action_phrase, parse_condition, parse_document, parse_requirement, FailureClass,
    ParserContext,
};
use rimay_core::syntax::token::{tokenize, TokenKind};
use rimay_core::syntax::*;
use serde::Deserialize;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg.into()) }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn requirement(text: &str, ctx: &ParserContext) -> Result<Requirement, String> {
    let r = parse_requirement(text, ctx);
    if !r.representable {
        return Err(format!("{text:?} not representable: {:?}", r.diagnostics));
    }
    Ok(r.requirement.unwrap())
}

fn atom(text: &str, ctx: &ParserContext) -> Result<Condition, String> {
    let r = parse_condition(text, ctx);
    match r.value {
        Some(Expr::Atom { atom }) if r.is_ok() => Ok(atom),
        other => Err(format!("{text:?} did not parse as one condition: {other:?} {:?}", r.diagnostics)),
    }
}

fn golden_corpus() -> Outcome {
    let ctx = common::ctx();
    let start = Instant::now();
    for text in common::GOLDEN_REQUIREMENTS {
        requirement(text, &ctx)?;
    }
    let fragments = [
        "the Transaction.Amount is less than or equal to 20000 Euros",
        "the Account Number field contains 0000",
        "Inx1 of type Settlement_Instruction has Status and Status is equal to Valid",
    ];
    for f in fragments {
        let r = parse_condition(f, &ctx);
        check(r.is_ok(), format!("{f:?}: {:?}", r.diagnostics))?;
    }
    let reject = parse_action_phrase("reject the \"Message\" in compliance with \"current validation rules\"", &ctx);
    check(reject.is_ok(), format!("compliance phrase: {:?}", reject.diagnostics))?;

    let req = requirement(common::GOLDEN_REQUIREMENTS[0], &ctx)?;
    let scope = req.scope.as_ref().ok_or("scope missing")?;
    check(scope.quantifier == Some(Quantifier::All) && req.conditions.is_none(), "scope shape")?;
    check(req.actor.name() == "System-A", "actor")?;
    let phrase = req.response.phrases()[0];
    check(phrase.code_id == "engender-27" && phrase.verb == "create", "create phrase")?;

    let req = requirement(common::GOLDEN_REQUIREMENTS[1], &ctx)?;
    let Some(ConditionStructure::When { trigger }) = req.conditions.as_ref().map(|c| &c.head) else {
        return Err("expected a when structure".into());
    };
    let action = trigger.actions.atoms()[0];
    check(trigger.actor.name() == "System-B" && action.code_id == "obtain-13.5.2", "trigger shape")?;
    check(action.filled_slots.iter().any(|s| s.role == Role::InitialLocation), "trigger source slot")?;

    let Condition::ClassOrPropOpElement { lhs, op, rhs } = atom(fragments[0], &ctx)? else {
        return Err("amount condition variant".into());
    };
    check(lhs.symbol.path == ["Transaction", "Amount"] && op.kind == OperatorKind::Le, "amount lhs/op")?;
    check(rhs == Some(Operand::Number { value: "20000".into(), unit: Some("Euros".into()) }), "amount rhs")?;

    let Condition::UiComponentOp { instance_label, component_type, op, .. } = atom(fragments[1], &ctx)? else {
        return Err("ui condition variant".into());
    };
    check(instance_label.raw == "Account Number" && component_type == "field", "ui label/type")?;
    check(op.kind == OperatorKind::Contains, "ui operator")?;

    let r = parse_condition(fragments[2], &ctx);
    let Some(Expr::And { left, right }) = r.value else { return Err("expected And".into()) };
    let is_has = matches!(left.as_ref(), Expr::Atom { atom: Condition::InstanceOrPropOpValue { op, .. } } if op.kind == OperatorKind::Has);
    let is_eq = matches!(right.as_ref(), Expr::Atom { atom: Condition::InstanceOrPropOpValue { op, .. } } if op.kind == OperatorKind::Eq);
    check(is_has && is_eq, "And(has, equal) shape")?;

    let phrase = reject.value.unwrap();
    check(phrase.code_id == "obtain-13.5.2", "reject code")?;
    check(phrase.filled_slots.iter().any(|s| s.role == Role::Compliance), "compliance slot")?;

    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("{} requirements + 4 fragments, 6 shape checks", common::GOLDEN_REQUIREMENTS.len()))
}

fn statistics() -> Outcome {
    let pairs = [(87, 65, 113, 96), (87, 65, 192, 180), (87, 65, 68, 64), (113, 96, 192, 180), (113, 96, 68, 64), (192, 180, 68, 64)];
    let expected = [(-1.81, 0.03), (-4.50, 3.35e-6), (-3.21, 6.67e-4), (-2.53, 0.01), (-1.86, 0.03), (-0.11, 0.46)];
    let start = Instant::now();
    let mut results = Vec::new();
    for (n1, x1, n2, x2) in pairs {
        results.push(ztest(ZTestInput { n1, x1, n2, x2 }, 0.05).map_err(|e| e.to_string())?);
    }
    let elapsed = start.elapsed();
    for (i, (r, (z, p))) in results.iter().zip(expected).enumerate() {
        check((r.z - z).abs() <= 0.02, format!("test {}: z {:.3} vs {z}", i + 1, r.z))?;
        check((r.p_value - p).abs() <= 0.01, format!("test {}: p {:.3e} vs {p}", i + 1, r.p_value))?;
        check(r.reject_h0 == (i < 5), format!("test {}: decision", i + 1))?;
    }
    check((results[1].p_value - 3.35e-6).abs() <= 1e-6, format!("test 2: p {:.3e}", results[1].p_value))?;
    within(elapsed, Duration::from_millis(10))?;
    Ok("6/6 z-tests match, reject 1-5, retain 6".into())
}

fn representability() -> Outcome {
    let ctx = common::ctx();
    let files = [
        include_str!("fixtures/srs/srs1.json"),
        include_str!("fixtures/srs/srs2.json"),
        include_str!("fixtures/srs/srs3.json"),
        include_str!("fixtures/srs/srs4.json"),
    ];
    let mut reports: Vec<CorpusReport> = Vec::new();
    for (i, text) in files.iter().enumerate() {
        let records = parse_document(text, &ctx).map_err(|e| e.to_string())?;
        let summaries: Vec<_> = records.iter().map(|r| r.summary(&ctx)).collect();
        reports.push(build_report(&summaries, &format!("SRS {}", i + 1)).map_err(|e| e.to_string())?);
    }
    for (r, want) in reports.iter().zip([74.7, 85.0, 93.8, 94.1]) {
        let pct = r.percent_representable * 100.0;
        check((pct - want).abs() <= 0.05, format!("{}: {pct:.2}% vs {want}%", r.srs_id))?;
    }
    let cause1: Vec<_> = reports.iter().map(|r| r.cause_counts.cause1).collect();
    check(cause1 == [11, 6, 2, 0], format!("cause 1 sequence {cause1:?}"))?;
    for k in 1..=4 {
        let s = saturation(&reports[..k]).map_err(|e| e.to_string())?;
        check(s.saturated == (k == 4), format!("saturation after {k} reports: {}", s.saturated))?;
    }
    check(pairwise_ztests(&reports, 0.05).map_err(|e| e.to_string())?.len() == 6, "pair count")?;
    Ok("74.7/85.0/93.8/94.1%, saturated after SRS 4".into())
}

fn lexicon() -> Outcome {
    let lex = Lexicon::default_lexicon();
    check(lex.len() == 48, format!("{} codes", lex.len()))?;
    let members = |id: &str| -> Result<BTreeSet<String>, String> {
        let code = lex.code(id).ok_or(format!("missing code {id}"))?;
        Ok(code.members.iter().map(|m| m.lemma.clone()).collect())
    };
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let exact: [(&str, &[&str]); 9] = [
        ("obtain-13.5.2", &["accept", "receive", "retrieve", "reject"]),
        ("keep-15.2", &["store"]),
        ("turn-26.6.1", &["convert", "change", "transform"]),
        ("calculate", &["calculate", "recalculate"]),
        ("begin-55.1-1", &["begin", "start"]),
        ("remove-10.1", &["extract", "remove", "delete", "deduct"]),
        ("use-105", &["apply", "use"]),
        ("update", &["update", "set"]),
        ("engender-27", &["create", "generate"]),
    ];
    for (id, want) in exact {
        check(members(id)? == set(want), format!("{id}: {:?}", members(id)?))?;
    }
    let send = members("send-11.1")?;
    check(send.is_superset(&set(&["return", "send", "forward", "pass", "export"])), format!("send-11.1: {send:?}"))?;
    Ok("48 codes, 10 spot checks".into())
}

fn round_trip() -> Outcome {
    let ctx = common::ctx();
    let strategy = common::gen::requirement();
    let mut runner = TestRunner::new_with_rng(Config::default(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let start = Instant::now();
    let cases = 1000;
    for _ in 0..cases {
        let text = strategy.new_tree(&mut runner).map_err(|e| e.to_string())?.current();
        let tree = requirement(&text, &ctx)?;
        let printed = pretty_print(&tree);
        let again = requirement(&printed, &ctx)?;
        check(structurally_equal(&tree, &again), format!("{text:?} printed as {printed:?}"))?;
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{cases} generated requirements, 0 failures"))
}

fn failure(text: &str, ctx: &ParserContext) -> Option<usize> {
    let r = parse_requirement(text, ctx);
    if r.representable { None } else { r.failure_offset() }
}

fn completion() -> Outcome {
    let ctx = common::ctx();
    let start = Instant::now();
    let mut prefixes = 0;
    for sentence in common::GOLDEN_REQUIREMENTS {
        let tokens = tokenize(sentence).map_err(|e| e.to_string())?;
        let words: Vec<_> = tokens.iter().filter(|t| t.kind != TokenKind::Eof).collect();
        for (i, next) in words.iter().enumerate() {
            let offset = next.span.start;
            // Only cut where the user would have typed a space.
            if i > 0 && !sentence[..offset].ends_with(char::is_whitespace) {
                continue;
            }
            prefixes += 1;
            let prefix = &sentence[..offset];
            let items = complete(&CompletionRequest { text: prefix, offset, ctx: &ctx }).map_err(|e| e.to_string())?;
            let literal = next.lexeme.to_lowercase();
            // Literals such as numbers and free text are covered by placeholder items.
            let offered = items.iter().any(|item| {
                let ins = item.insert_text.to_lowercase();
                ins == literal
                    || ins.starts_with(&format!("{literal} "))
                    || item.label == "\"text\""
                    || (!matches!(next.kind, TokenKind::Keyword | TokenKind::Punctuation)
                        && !ctx.lexicon.is_verb(&next.lexeme)
                        && ctx.symbols.category_of(&next.lexeme).is_none()
                        && matches!(
                            item.kind,
                            CompletionKind::Snippet | CompletionKind::Instance | CompletionKind::Class | CompletionKind::UiComponent
                        ))
            });
            check(offered, format!("{prefix:?}: next token {:?} not offered", next.lexeme))?;
            let before = failure(prefix, &ctx);
            for item in &items {
                check(!item.insert_text.is_empty(), "empty insert text")?;
                let extended = format!("{prefix}{}", item.insert_text);
                if let (Some(after), Some(before)) = (failure(&extended, &ctx), before) {
                    check(after > before, format!("{prefix:?} + {:?} fails at {after} <= {before}", item.insert_text))?;
                }
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{prefixes} prefixes"))
}

#[derive(Deserialize)]
struct Labelled {
    id: String,
    description: String,
    label: FailureClass,
}

fn causes() -> Outcome {
    let ctx = common::ctx();
    let items: Vec<Labelled> =
        serde_json::from_str(include_str!("fixtures/causes.json")).map_err(|e| e.to_string())?;
    let count = |c| items.iter().filter(|i| i.label == c).count();
    check(
        items.len() == 20 && count(FailureClass::Cause1) == 10 && count(FailureClass::Cause2) == 10,
        "fixture must hold 10 cause-1 and 10 cause-2 items",
    )?;
    for item in &items {
        let got = classify_failure(&parse_requirement(&item.description, &ctx), &ctx).map_err(|e| format!("{}: {e}", item.id))?;
        check(got == item.label, format!("{}: {got:?} vs {:?}", item.id, item.label))?;
    }
    Ok("20/20 agree".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("golden corpus parsing", golden_corpus),
        ("statistical reproduction", statistics),
        ("representability table", representability),
        ("lexicon completeness", lexicon),
        ("round trip", round_trip),
        ("completion soundness", completion),
        ("cause classification", causes),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
