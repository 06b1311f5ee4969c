use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rimay_core::lexicon::{
    builtin_default_template, conjugate, load_lexicon, merge_lexicons, Lexicon, Origin, VerbCode,
    VerbMember,
};

/// Codes and members of the four coding tables, transcribed as printed.
const QUALITATIVE_VERBNET: &[(&str, &[&str])] = &[
    ("admit-65", &["exclude"]),
    ("advise-37.9-1", &["instruct"]),
    ("allow-64.1", &["allow", "authorize"]),
    ("beg-58.2", &["request"]),
    ("begin-55.1-1", &["begin"]),
    ("concealment-16-1", &["hide"]),
    ("contribute-13.2", &["restore"]),
    ("create-26.4", &["compute", "publish"]),
    ("enforce-63", &["enforce"]),
    ("engender-27", &["create", "generate"]),
    ("exchange-13.6", &["replace"]),
    ("forbid-67", &["prevent"]),
    ("herd-47.5.2", &["aggregate"]),
    ("involve-107", &["include"]),
    ("keep-15.2", &["store"]),
    ("limit-76", &["limit", "restrict", "reduce"]),
    ("mix-22.1-2", &["add"]),
    ("mix-22.1-2-1", &["link"]),
    ("neglect-75-1-1", &["neglect", "ignore"]),
    ("obtain-13.5.2", &["accept", "receive", "retrieve"]),
    ("other_cos-45.4", &["close"]),
    ("put-9.1", &["insert"]),
    ("reflexive_appearance-48.1.2", &["display", "show"]),
    ("remove-10.1", &["extract", "remove", "delete"]),
    ("say-37.7-1", &["report", "propose"]),
    ("see-30.1-1", &["detect"]),
    ("send-11.1", &["return", "send", "forward", "pass"]),
    ("shake-22.3-2-1", &["concatenate"]),
    ("throw-17.1", &["discard"]),
    ("transcribe-25.4", &["copy"]),
    ("turn-26.6.1", &["convert", "change", "transform"]),
    ("use-105", &["apply"]),
];

const QUALITATIVE_PROPOSED: &[(&str, &[&str])] = &[
    ("cancel", &["cancel"]),
    ("enable_disable", &["enable", "disable"]),
    ("get_from", &["download"]),
    ("interrupt", &["interrupt"]),
    ("migrate", &["migrate"]),
    ("select_unselect", &["select", "unselect"]),
    ("synchronize", &["synchronize"]),
    ("update", &["update"]),
    ("validate", &["validate", "check"]),
];

const EVALUATION_VERBNET: &[(&str, &[&str])] = &[
    ("begin-55.1-1", &["start"]),
    ("establish-55.5-1", &["establish"]),
    ("other_cos-45.4", &["reverse"]),
    ("remove-10.1", &["deduct"]),
    ("search-35.2", &["search"]),
    ("send-11.1", &["export"]),
    ("stop-55.4", &["stop"]),
    ("use-105", &["use"]),
];

const EVALUATION_PROPOSED: &[(&str, &[&str])] = &[
    ("calculate", &["calculate", "recalculate"]),
    ("split", &["split"]),
    ("subscribe", &["subscribe"]),
    ("upload", &["upload"]),
    ("update", &["set"]),
];

/// Members named outside the tables: `reject` in the obtain rule's
/// examples and `import` in the send prose.
const EXTRA_MEMBERS: &[(&str, &str)] = &[("obtain-13.5.2", "reject"), ("send-11.1", "import")];

fn table_union() -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for table in [QUALITATIVE_VERBNET, QUALITATIVE_PROPOSED, EVALUATION_VERBNET, EVALUATION_PROPOSED] {
        for (id, members) in table {
            out.entry(id.to_string())
                .or_default()
                .extend(members.iter().map(|m| m.to_string()));
        }
    }
    out
}

fn default_members() -> BTreeMap<String, BTreeSet<String>> {
    Lexicon::default_lexicon()
        .codes()
        .map(|c| (c.id.clone(), c.lemmas().map(str::to_string).collect()))
        .collect()
}

#[test]
fn default_lexicon_has_48_codes() {
    assert_eq!(Lexicon::default_lexicon().len(), 48);
    assert_eq!(table_union().len(), 48);
}

#[test]
fn default_members_match_table_union() {
    let mut want = table_union();
    for (id, lemma) in EXTRA_MEMBERS {
        want.get_mut(*id).unwrap().insert(lemma.to_string());
    }
    assert_eq!(default_members(), want);
}

#[test]
fn extra_members_are_the_only_additions() {
    let lex = Lexicon::default_lexicon();
    let import = lex.code("send-11.1").unwrap().members.iter().find(|m| m.lemma == "import").unwrap();
    assert!(import.provisional);
    let provisional: Vec<_> = lex
        .codes()
        .flat_map(|c| c.members.iter().filter(|m| m.provisional).map(|m| m.lemma.clone()))
        .collect();
    assert_eq!(provisional, ["import"]);
}

#[test]
fn spot_checked_codes() {
    let m = default_members();
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(m["obtain-13.5.2"], set(&["accept", "receive", "retrieve", "reject"]));
    assert!(m["send-11.1"].is_superset(&set(&["return", "send", "forward", "pass", "export"])));
    assert_eq!(m["keep-15.2"], set(&["store"]));
    assert_eq!(m["turn-26.6.1"], set(&["convert", "change", "transform"]));
    assert_eq!(m["calculate"], set(&["calculate", "recalculate"]));
    assert_eq!(m["begin-55.1-1"], set(&["begin", "start"]));
    assert_eq!(m["remove-10.1"], set(&["extract", "remove", "delete", "deduct"]));
    assert_eq!(m["use-105"], set(&["apply", "use"]));
    assert_eq!(m["update"], set(&["update", "set"]));
    assert_eq!(m["validate"], set(&["validate", "check"]));
    assert_eq!(m["other_cos-45.4"], set(&["close", "reverse"]));
}

#[test]
fn origins_follow_code_ids() {
    let lex = Lexicon::default_lexicon();
    let verbnet = lex.codes().filter(|c| c.origin == Origin::Verbnet).count();
    assert_eq!(verbnet, 35);
    assert_eq!(lex.len() - verbnet, 13);
}

#[test]
fn default_index_is_complete() {
    let lex = Lexicon::default_lexicon();
    for code in lex.codes() {
        for member in &code.members {
            for form in &member.surface_forms {
                let hits = lex.lookup_verb(form);
                assert!(
                    hits.contains(&(code.id.clone(), member.lemma.clone())),
                    "{form} -> {hits:?}"
                );
                assert!(!lex.lookup_verb(&form.to_uppercase()).is_empty());
            }
        }
    }
    assert!(lex.lookup_verb("reconcile").is_empty());
}

#[test]
fn lexicon_document_round_trips() {
    let lex = Lexicon::default_lexicon();
    let doc = serde_json::to_string(&lex.to_document()).unwrap();
    assert_eq!(load_lexicon(&doc).unwrap(), lex);
}

fn lemma() -> impl Strategy<Value = String> {
    "[a-z]{3,9}"
}

fn code() -> impl Strategy<Value = VerbCode> {
    (
        prop_oneof![Just("alpha-1.2"), Just("beta-3"), Just("gamma"), Just("delta"), Just("eps-9.9-1")],
        prop::collection::btree_set(lemma(), 1..4),
    )
        .prop_map(|(id, lemmas)| VerbCode {
            id: id.to_string(),
            origin: if id.contains('-') { Origin::Verbnet } else { Origin::Proposed },
            members: lemmas.iter().map(|l| VerbMember::regular(l)).collect(),
            slot_template: builtin_default_template(),
        })
}

fn lexicon() -> impl Strategy<Value = Lexicon> {
    prop::collection::vec(code(), 0..5).prop_map(|codes| {
        let mut seen = BTreeSet::new();
        let unique: Vec<_> = codes.into_iter().filter(|c| seen.insert(c.id.clone())).collect();
        Lexicon::from_codes(unique).unwrap()
    })
}

proptest! {
    #[test]
    fn index_completeness(lex in lexicon()) {
        for code in lex.codes() {
            for member in &code.members {
                for form in &member.surface_forms {
                    prop_assert!(lex.lookup_verb(form).contains(&(code.id.clone(), member.lemma.clone())));
                }
            }
        }
    }

    #[test]
    fn merge_with_empty_is_identity(lex in lexicon()) {
        prop_assert_eq!(merge_lexicons(&lex, &Lexicon::empty()), lex);
    }

    #[test]
    fn merge_is_idempotent(base in lexicon(), overlay in lexicon()) {
        let once = merge_lexicons(&base, &overlay);
        prop_assert_eq!(merge_lexicons(&once, &overlay), once);
    }

    #[test]
    fn merge_keeps_every_member(base in lexicon(), overlay in lexicon()) {
        let merged = merge_lexicons(&base, &overlay);
        for lex in [&base, &overlay] {
            for code in lex.codes() {
                for member in &code.members {
                    for form in &member.surface_forms {
                        prop_assert!(!merged.lookup_verb(form).is_empty());
                    }
                }
            }
        }
    }

    #[test]
    fn conjugation_contains_lemma(l in lemma()) {
        let forms = conjugate(&l);
        prop_assert!(forms.contains(&l));
        prop_assert_eq!(forms.len(), 3);
    }
}
