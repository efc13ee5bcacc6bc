//! Question templates. Placeholders: `{D}` dataset, `{T}` treatment, `{Y}`
//! response, `{M}` mediator, `{C}` condition clause, `{N}` node list,
//! `{verb}` / `{noun}` synonym slots. CGL templates come in pairs: the
//! first form serves the all-variables query, the second named nodes.

pub const EFFECT_NOUNS: [&str; 3] = ["effect", "impact", "influence"];
pub const EFFECT_VERBS: [&str; 4] = ["affect", "influence", "impact", "drive"];

pub const CGL: [(&str, &str); 6] = [
    (
        "Is there a method to discover every direct influence present in the {D} dataset?",
        "Is there a method to discover every direct influence among {N} in the {D} dataset?",
    ),
    ("Which causal links exist among the variables recorded in {D}?", "Which causal links exist among {N} in {D}?"),
    ("Can you learn the causal graph of the {D} dataset?", "Can you learn the causal graph over {N} from the {D} dataset?"),
    ("What is the causal structure of the variables in {D}?", "What is the causal structure between {N} according to {D}?"),
    (
        "Using {D}, identify the cause-and-effect relationships among all variables.",
        "Using {D}, identify the cause-and-effect relationships among {N}.",
    ),
    ("Does {D} show which variables directly cause each other?", "Does {D} show whether {N} directly cause each other?"),
];

pub const ATE: [&str; 6] = [
    "What is the average {noun} of {T} on {Y} in {D}?",
    "Based on {D}, how much does {T} {verb} {Y} on average?",
    "Using the {D} dataset, estimate the average treatment effect of {T} on {Y}.",
    "In {D}, if {T} is increased, how does {Y} respond on average?",
    "Does {T} {verb} {Y}? Please use {D} to evaluate the overall {noun}.",
    "How does {T} contribute to changes in {Y} according to {D}?",
];

pub const HTE: [&str; 6] = [
    "What is the {noun} of {T} on {Y} for those having {C} in {D}?",
    "In {D}, how does {T} {verb} {Y} when {C}?",
    "Using {D}, estimate the heterogeneous treatment effect of {T} on {Y} under the condition {C}.",
    "For the subgroup where {C}, what is the {noun} of {T} on {Y} in the {D} dataset?",
    "Among units with {C}, does {T} {verb} {Y}? Use {D}.",
    "Based on {D}, what {noun} does {T} have on {Y} under a specific condition where {C}?",
];

pub const MA: [&str; 6] = [
    "How much of the {noun} of {T} on {Y} is mediated by {M} in {D}?",
    "In {D}, does {T} {verb} {Y} through {M}?",
    "Using {D}, decompose the {noun} of {T} on {Y} into direct and indirect effects via {M}.",
    "What is the mediating role of {M} in the {noun} of {T} on {Y} in {D}?",
    "Based on {D}, how much of the {noun} of {T} on {Y} passes through {M}?",
    "Is there evidence in {D} that the pathway from {T} to {Y} is mediated by {M}?",
];

pub const OPO: [&str; 6] = [
    "Given {C}, which level of {T} should be chosen to maximize {Y} in {D}?",
    "In {D}, what value of {T} is recommended to improve {Y} when {C}?",
    "Using {D}, what is the optimal action for {T} to maximize {Y} for those having {C}?",
    "Based on {D}, what is the best choice of {T} for boosting {Y} given {C}?",
    "Under the condition {C}, what is the best action of {T} for maximizing {Y} in {D}?",
    "If {C}, what recommendations can be derived from {D} on adjusting {T} to positively impact {Y}?",
];
