//! Strategies producing valid requirement text.

use proptest::prelude::*;
use proptest::sample::select;

const ACTORS: &[&str] = &["System-A", "System-B", "IFSIG"];
const ELEMENTS: &[&str] = &[
    "the email alert",
    "a MT530 transaction processing command",
    "the DA_file",
    "the report",
    "all the depositories",
    "CFCL_IT",
];
const SUBJECTS: &[&str] = &[
    "Instruction",
    "the Transaction",
    "Instruction.Status",
    "the Transaction.Amount",
    "Transaction Type of Settlement Request",
    "Settlement_Instruction.Owner",
];
const VALUES: &[&str] = &["Valid", "Z-Value", "Pending"];
const COMPARE: &[&str] = &[
    "is equal to",
    "equals to",
    "is",
    "is not",
    "is different from",
    "is less than",
    "is less or equal to",
    "less or equal to",
    "is greater than or equal to",
    "is not greater than",
    "contains",
    "does not contain",
    "has",
    "does not have",
];
const WORDS: &[&str] = &["the", "encryption", "module", "is", "installed", "legacy", "mode"];

fn rhs() -> impl Strategy<Value = String> {
    prop_oneof![
        select(VALUES).prop_map(str::to_string),
        (1u32..100000).prop_map(|n| n.to_string()),
        (1u32..500, select(&["Euros", "Days"][..])).prop_map(|(n, u)| format!("{n} {u}")),
        select(&["\"FISN\"", "the \"Message\""][..]).prop_map(str::to_string),
        select(ELEMENTS).prop_map(str::to_string),
    ]
}

fn condition() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => (select(SUBJECTS), select(COMPARE), rhs()).prop_map(|(s, o, r)| format!("{s} {o} {r}")),
        1 => select(SUBJECTS).prop_map(|s| format!("{s} is available")),
        1 => select(SUBJECTS).prop_map(|s| format!("{s} is not available")),
        1 => Just("Instruction.Settlement_Date conforms to the standard ISO-8601".to_string()),
        1 => Just("Instruction.Settlement_Date does not conform to the format YYYY-MM-DD".to_string()),
        1 => Just("Instruction has the properties: Owner, Status and Settlement_Date".to_string()),
        1 => Just("Transaction has the properties described in the Section 1.b".to_string()),
        1 => (select(&["the Account Number field", "the \"Amount\" field", "the Settlement calendar"][..]), rhs())
            .prop_map(|(f, r)| format!("{f} contains {r}")),
    ]
}

fn expr(atom: BoxedStrategy<String>, allow_not: bool) -> impl Strategy<Value = String> {
    atom.prop_recursive(3, 8, 2, move |inner| {
        let mut alts = vec![
            (inner.clone(), select(&["and", "or"][..]), inner.clone())
                .prop_map(|(a, c, b)| format!("{a} {c} {b}"))
                .boxed(),
            inner.clone().prop_map(|a| format!("({a})")).boxed(),
        ];
        if allow_not {
            alts.push(inner.prop_map(|a| format!("not {a}")).boxed());
        }
        proptest::strategy::Union::new(alts)
    })
}

fn action() -> impl Strategy<Value = String> {
    prop_oneof![
        select(ELEMENTS).prop_map(|e| format!("store {e}")),
        (select(ELEMENTS), select(ACTORS)).prop_map(|(e, a)| format!("send {e} to {a}")),
        (select(ELEMENTS), select(ACTORS), select(ACTORS))
            .prop_map(|(e, a, b)| format!("receive {e} from {a} and {b}")),
        select(ELEMENTS).prop_map(|e| format!("create {e}")),
        Just("reject the \"Message\" in compliance with \"current validation rules\"".to_string()),
        (select(ELEMENTS), select(ACTORS)).prop_map(|(e, a)| format!("forward {e} through {a}")),
        select(SUBJECTS).prop_map(|s| format!("validate {s}")),
    ]
}

fn response_atom() -> impl Strategy<Value = String> {
    (action(), prop::option::of((1u32..60, select(&["seconds", "minutes", "day", "hours"][..]))))
        .prop_map(|(a, f)| match f {
            Some((n, u)) => format!("{a} every {n} {u}"),
            None => a,
        })
}

fn trigger() -> impl Strategy<Value = String> {
    (select(ACTORS), expr(action().boxed(), false))
        .prop_map(|(a, e)| format!("{a} {e}"))
}

fn itemized<S: Strategy<Value = String>>(item: S) -> impl Strategy<Value = String> {
    prop::collection::vec((item, any::<bool>()), 2..4).prop_map(|items| {
        let n = items.len();
        items
            .into_iter()
            .enumerate()
            .map(|(i, (text, or))| {
                let tail = if or && i + 1 < n { ", or" } else { "" };
                format!("\n- {text}{tail}")
            })
            .collect()
    })
}

fn structure() -> impl Strategy<Value = (String, bool)> {
    let plain = prop_oneof![
        expr(condition().boxed(), true).prop_map(|e| format!("while {e}")),
        trigger().prop_map(|t| format!("when {t}")),
        prop::collection::vec(select(WORDS), 1..5).prop_map(|w| format!("where {}", w.join(" "))),
        expr(condition().boxed(), true).prop_map(|e| format!("if {e}")),
        (select(&["before", "after"][..]), select(&["1h00", "23h59 CET", "7h30"][..]))
            .prop_map(|(d, t)| format!("{d} {t}")),
        (select(&["before", "after"][..]), trigger()).prop_map(|(d, t)| format!("{d} {t}")),
    ]
    .prop_map(|s| (s, false));
    let items = itemized(expr(condition().boxed(), true))
        .prop_map(|i| (format!("if the following conditions hold:{i}\n"), true));
    prop_oneof![5 => plain, 1 => items]
}

pub fn requirement() -> impl Strategy<Value = String> {
    let scope = prop::option::of(select(&["For all the depositories, ", "For each Instruction, ", "For the report, "][..]));
    let conditions = prop::option::of((structure(), prop::collection::vec((select(&["and", "or"][..]), structure()), 0..2)));
    let response = prop_oneof![
        3 => expr(response_atom().boxed(), false).prop_map(|e| format!(" {e}")),
        1 => itemized(response_atom()).prop_map(|i| format!(":{i}")),
    ];
    (scope, conditions, select(ACTORS), select(&["must", "shall", "must not", "shall not"][..]), response)
        .prop_map(|(scope, conds, actor, modal, response)| {
            let mut out = scope.unwrap_or("").to_string();
            if let Some(((head, mut itemized), rest)) = conds {
                out.push_str(&head);
                for (c, (s, i)) in rest {
                    out.push_str(&format!(" {c} {s}"));
                    itemized = i;
                }
                if !itemized {
                    out.push_str(", ");
                }
            }
            format!("{out}{actor} {modal}{response}")
        })
}
