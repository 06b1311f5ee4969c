#![allow(dead_code)]

use rimay_core::lexicon::Lexicon;
use rimay_core::model::SymbolTable;
use rimay_core::parser::ParserContext;

pub mod gen;

pub const MODEL: &str = include_str!("../fixtures/model.json");

pub fn symbols() -> SymbolTable {
    SymbolTable::import_model(MODEL).expect("fixture model loads")
}

pub fn ctx() -> ParserContext {
    ParserContext::new(Lexicon::default_lexicon(), symbols())
}

/// Reference example sentences and fragments, each embedded in a full requirement.
pub const GOLDEN_REQUIREMENTS: &[&str] = &[
    "For all the depositories, System-A must create a MT530 transaction processing command",
    "When System-B receives an email alert from System-A, System-B must store the email alert",
    "If Instruction has the properties described in the Section 1.b, System-A must validate the Instruction",
    "If Instruction has the properties: Owner, Status and Settlement_Date, System-A must validate the Instruction",
    "If Instruction.Settlement_Date conforms to the standard ISO-8601, System-A must store the record",
    "If Inx1 of type Settlement_Instruction has Status and Status is equal to Valid, System-A must validate Inx1",
    "If Transaction Type of Settlement Request is equal to Z-Value, System-A must store the record",
    "System-A must send the report to System-B every 3 seconds",
    "If the Account Number field contains 0000, System-A must store the record",
    "If the Transaction.Amount is less than or equal to 20000 Euros, System-A must store the record",
    "System-A must receive a DA_file from CFCL_IT",
    "System-A must reject the \"Message\" in compliance with \"current validation rules\"",
    "If Instruction.Status is available and when System-B receives an email alert from System-A, System-B must store the email alert",
];
