//! Expected decisions for model responses with varied casing, brackets and
//! verbosity.

use manualcode::gateway::Decision::{self, No, Unparseable as U, Yes};

pub const VERDICT_CASES: &[(&str, Decision)] = &[
    ("EVIDENCE: \"argued with wife\"\nFINAL CODING: Yes", Yes),
    ("EVIDENCE: None found\nFINAL CODING: No", No),
    ("FINAL CODING: yes", Yes),
    ("FINAL CODING: NO", No),
    ("final coding: Yes.", Yes),
    ("FINAL CODING: [Yes]", Yes),
    ("FINAL CODING: **No**", No),
    ("FINAL CODING: \"Yes\"", Yes),
    ("FINAL CODING:Yes", Yes),
    ("FINAL CODING: Yes, the narrative mentions it", Yes),
    ("FINAL CODING: No - nothing indicates this", No),
    ("FINAL CODING: [Yes or No]", U),
    ("FINAL CODING: Yes or No", U),
    ("FINAL CODING: no or yes", U),
    ("FINAL CODING: Maybe", U),
    ("FINAL CODING:", U),
    ("FINAL CODING:\n\nYes", Yes),
    ("FINAL CODING:\n  \nNo.", No),
    ("FINAL CODING: Yes\nFINAL CODING: No", No),
    ("FINAL CODING: No\nOn reflection:\nFINAL CODING: Yes", Yes),
    ("Thinking... yes it seems so.\nFINAL CODING: No", No),
    ("FINAL CODING: Yes\n\nI hope this helps!", Yes),
    ("Yes", Yes),
    ("No", No),
    ("yes.", Yes),
    ("The answer is no.", No),
    ("Initially yes, but on balance no", No),
    ("No evidence; answer Yes", Yes),
    ("", U),
    ("I cannot determine this.", U),
    ("Yesterday he drank.", U),
    ("Nobody was home", U),
    ("EVIDENCE: None found", U),
    ("**FINAL CODING:** Yes", Yes),
    ("## FINAL CODING: No", No),
    ("Final Coding: yes", Yes),
    ("FINAL CODING: Definitely yes", Yes),
    ("FINAL CODING: The answer is no", No),
    ("FINAL CODING: certainly not yes and no", U),
    ("FINAL CODING: Yes (the father drank)", Yes),
    ("FINAL CODING: YES!!!", Yes),
    ("FINAL CODING: Yes\r\n", Yes),
    ("EVIDENCE: \"no\"\r\nFINAL CODING: Yes\r\n", Yes),
    ("EVIDENCE: FINAL CODING: No", No),
    ("FINAL CODING: \u{201c}No\u{201d}", No),
    ("FINAL CODING: yes yes", Yes),
    ("FINAL CODING: n/a", U),
    ("FINAL CODING: 1", U),
    ("Response:\nFINAL CODING:\nMaybe", U),
    ("FINAL CODING: Nö", U),
];
