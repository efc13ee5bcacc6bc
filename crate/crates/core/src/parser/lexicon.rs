//! Lexical cue table for task classification and the function-word list
//! used to delimit variable mentions.

use std::collections::{BTreeMap, HashSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::schema::Task;

/// One weighted lexical cue.
#[derive(Debug, Clone)]
pub struct Cue {
    pub pattern: Regex,
    pub weight: f64,
    /// Only counts when the question states a condition (`x = v`).
    pub needs_condition: bool,
}

/// Per-task ordered cue lists. Patterns are case-insensitive.
#[derive(Debug, Clone)]
pub struct CueTable {
    cues: BTreeMap<Task, Vec<Cue>>,
}

fn cue(pattern: &str, weight: f64) -> Cue {
    Cue { pattern: Regex::new(&format!(r"(?i){pattern}")).expect("cue pattern"), weight, needs_condition: false }
}

fn conditional(pattern: &str, weight: f64) -> Cue {
    Cue { needs_condition: true, ..cue(pattern, weight) }
}

const EFFECT_WORDS: &str = r"\b(?:effects?|impacts?|influences?|affects?|affecting|difference|changes?|drives?|alters?)\b";

impl Default for CueTable {
    fn default() -> Self {
        let mut cues = BTreeMap::new();
        cues.insert(
            Task::Ma,
            vec![
                cue(r"\bmediat(?:e|ed|es|ing|ion|or|ors)\b", 5.0),
                cue(r"\bpathways?\b", 5.0),
                cue(r"\bindirect(?:ly)?\b", 5.0),
                cue(r"\b(?:passes|pass|flows?|channell?ed|transmitted|goes|travels?) through\b", 5.0),
                cue(r"\bby way of\b", 5.0),
                cue(r"\b(?:affects?|influences?|impacts?|drives?)\b.*\b(?:through|via)\b", 5.0),
            ],
        );
        cues.insert(
            Task::Opo,
            vec![
                cue(r"\brecommend(?:s|ed|ation|ations)?\b", 4.0),
                cue(r"\bbest (?:action|option|choice|level|setting|decision|strategy|value)\b", 4.0),
                cue(r"\badjusting\b", 4.0),
                cue(r"\boptim(?:al|ally|ize|ise|izing|ising|ization|isation)\b", 4.0),
                cue(r"\b(?:maximi[sz]e|maximi[sz]ing|minimi[sz]e|minimi[sz]ing)\b", 4.0),
                cue(r"\bpositively (?:impact|affect|influence)\b", 4.0),
                cue(r"\bwhich (?:level|value|action|option)\b", 4.0),
                cue(r"\bshould\b.*\b(?:set|choose|pick|select|take)\b", 4.0),
            ],
        );
        cues.insert(
            Task::Hte,
            vec![
                conditional(EFFECT_WORDS, 3.0),
                cue(r"\bunder a (?:group |specific |particular )?condition\b", 2.0),
                cue(r"\bfor those\b", 2.0),
                cue(r"\bsub-?(?:group|population)s?\b", 2.0),
                cue(r"\bamong (?:those|units|cases|records)\b", 2.0),
            ],
        );
        cues.insert(
            Task::Cgl,
            vec![
                cue(r"\bcausal (?:links?|relationships?|relations?|connections?|structure|graph|paths?|ties)\b", 3.0),
                cue(r"\bdirect (?:links?|influences?|relationships?|connections?|causal)\b", 3.0),
                cue(r"\bconnections among\b", 3.0),
                cue(r"\bdirectly caus(?:e|es|ing)\b", 3.0),
                cue(r"\bcause-and-effect (?:links?|structure|relationships?)\b", 3.0),
                cue(r"\bwhich (?:variables|factors) cause\b", 3.0),
            ],
        );
        cues.insert(
            Task::Ate,
            vec![
                cue(r"\beffects? of\b", 1.0),
                cue(r"\bimpacts? of\b", 1.0),
                cue(r"\bcontributes? to\b", 1.0),
                cue(r"\binfluences? on\b", 1.0),
                cue(r"\b(?:affects?|affecting|influences?|impacts?|drives?)\b", 1.0),
                cue(r"\baverage\b", 1.0),
            ],
        );
        Self { cues }
    }
}

impl CueTable {
    pub fn cues(&self, task: Task) -> &[Cue] {
        self.cues.get(&task).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Replaces the cue list of one task.
    pub fn set(&mut self, task: Task, cues: Vec<Cue>) {
        self.cues.insert(task, cues);
    }

    /// Sum of matched cue weights per task.
    pub fn scores(&self, question: &str, has_condition: bool) -> BTreeMap<Task, f64> {
        Task::ALL
            .iter()
            .map(|&t| {
                let s = self
                    .cues(t)
                    .iter()
                    .filter(|c| !c.needs_condition || has_condition)
                    .filter(|c| c.pattern.is_match(question))
                    .map(|c| c.weight)
                    .sum();
                (t, s)
            })
            .collect()
    }
}

/// Most specific first; used to break score ties.
pub const TIE_PRIORITY: [Task; 5] = [Task::Ma, Task::Opo, Task::Hte, Task::Cgl, Task::Ate];

const FUNCTION_WORDS: &str = "
a an the this that these those it its their there here any some all every each both either
of in on to from by for with between among amongst within across into onto upon about over under
through via toward towards against during after before around at as than then so such
and or nor but not no yes if when whenever where whereas while whether once unless until
is are was were be been being am do does did doing done have has had having
can could would should will shall may might must
how what which who whom whose why
i we you they me us my our your one ones
dataset datasets file files csv another other others
based according findings finding evidence evident results result analysis analyses
evaluate evaluating evaluated assess assessing assessed estimate estimating estimated estimation
determine determining determined measure measuring quantify quantifying identify identifying identified
discover discovering find finding found learn learning learned reveal reveals revealing
show shows shown showing indicate indicates indicating indication suggest suggests
provide provides providing derive derived deriving obtain obtained
exist exists existing existence present presence observe observed observable observation discernible
effect effects impact impacts impacting impacted influence influences influencing influenced
affect affects affecting affected drive drives driving driven contribute contributes contributing contribution
change changes changing changed alter alters altering altered shape shapes shaping shift shifts
cause causes causing caused causal causally cause-and-effect consequence consequences outcome outcomes
modify modifies modified lead leads leading vary varies variation variations move moves movement movements
raise raises raising raised lower lowers lowering lowered increase increases increasing increased
decrease decreases decreasing decreased improve improves improving boost boosts boosting boosted reduce reduces reducing
level levels value values amount degree extent magnitude size role strength
link links linked relationship relationships relation relations connection connections connected
direct directly indirect indirectly structure graph network path paths pathway pathways ties tie
mediate mediates mediated mediating mediation mediator mediators channel channels channelled transmitted
pass passes flows flow goes go travels travel way route
average overall total net mean expected typical
heterogeneous conditional specific particular group groups subgroup subgroups population subpopulation condition conditions
units cases case individuals those having with without fixed set setting sets held hold stands stand standing equals equal
recommend recommends recommended recommendation recommendations best optimal optimally optimize optimise optimizing
maximize maximise maximizing maximising minimize minimise minimizing minimising
adjust adjusting adjusted action actions option options choice choices decision decisions strategy policy
choose choosing pick select selecting take taking
positive positively negative negatively significant significantly substantial substantially notable meaningful
method methods way ways approach technique procedure tool tools
many much more most less least number instances instance factor factors variable variables
apply applying applied use using used test testing tested examine examining explore exploring investigate
tell know knowing understand see figure out whereby
really actually also just only even still likely possible possibly truly clearly
given considering regarding concerning
response responses respond responds react reacts treatment treatments intervention interventions
target targets exposure exposures
question questions answer
effectiveness efficacy success
record records recorded please kindly help need want
";

/// Words that never start or extend a variable mention.
pub fn function_words() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| FUNCTION_WORDS.split_whitespace().collect())
}

pub fn is_function_word(lower: &str) -> bool {
    function_words().contains(lower)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_task_has_three_cues() {
        let t = CueTable::default();
        for task in Task::ALL {
            assert!(t.cues(task).len() >= 3, "{task}");
        }
    }

    #[test]
    fn cues_are_case_insensitive() {
        let t = CueTable::default();
        let s = t.scores("IS THIS MEDIATED BY SOMETHING?", false);
        assert!(s[&Task::Ma] > 0.0);
    }

    #[test]
    fn hte_effect_cue_needs_condition() {
        let t = CueTable::default();
        assert_eq!(t.scores("effect of a on b", false)[&Task::Hte], 0.0);
        assert!(t.scores("effect of a on b", true)[&Task::Hte] > 0.0);
    }
}
