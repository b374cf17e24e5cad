//! CKY chart over token spans with forward/backward application, bounded
//! token skipping and embedding-based lexical substitution.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::category::Category;
use super::embeddings::{oov_candidates, OovCandidate};
use super::lf::{Lf, Quant};
use super::perceptron::{lexical_feature, oov_lexical_feature, Features, OOV_FEATURE, OOV_SIM_FEATURE, SKIP_FEATURE};
use super::tokenize::is_punctuation;
use super::types::SemType;
use super::Parser;

/// What a complete parse must be.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootTarget {
    /// A full command: category `S`, type action.
    Command,
    /// A noun phrase (or prepositional phrase) denoting an entity of the
    /// given type; a bare noun is read as a definite description.
    Entity(SemType),
}

impl RootTarget {
    fn accept(&self, cat: &Category, ty: &SemType, lf: &Lf) -> Option<(Lf, SemType)> {
        match self {
            RootTarget::Command => match cat {
                Category::Atom(a) if a == "S" && *ty == SemType::Action => Some((lf.clone(), ty.clone())),
                _ => None,
            },
            RootTarget::Entity(want) => match cat {
                Category::Atom(a) if (a == "NP" || a.starts_with("PP")) && ty == want => {
                    Some((lf.clone(), ty.clone()))
                }
                Category::Atom(a) if a == "N" && *ty == SemType::pred(want.clone()) => {
                    Some((Lf::Desc(Quant::The, Box::new(lf.clone())).normalize(), want.clone()))
                }
                _ => None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OovUse {
    pub token_index: usize,
    pub token: String,
    pub known_word: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Derivation {
    Lexical {
        start: usize,
        end: usize,
        entry_key: String,
        category: Category,
        oov: Option<OovUse>,
    },
    Apply {
        forward: bool,
        start: usize,
        end: usize,
        left: Arc<Derivation>,
        right: Arc<Derivation>,
    },
}

impl Derivation {
    pub fn span(&self) -> (usize, usize) {
        match self {
            Derivation::Lexical { start, end, .. } | Derivation::Apply { start, end, .. } => (*start, *end),
        }
    }

    /// Token indices covered by lexical leaves.
    pub fn covered(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk_leaves(&mut |d| {
            let (s, e) = d.span();
            out.extend(s..e);
        });
        out
    }

    pub fn walk_leaves(&self, f: &mut impl FnMut(&Derivation)) {
        match self {
            Derivation::Lexical { .. } => f(self),
            Derivation::Apply { left, right, .. } => {
                left.walk_leaves(f);
                right.walk_leaves(f);
            }
        }
    }

    pub fn signature(&self) -> String {
        match self {
            Derivation::Lexical { start, entry_key, oov, .. } => match oov {
                Some(o) => format!("{start}:{}~{entry_key}", o.token),
                None => format!("{start}:{entry_key}"),
            },
            Derivation::Apply { left, right, forward, .. } => {
                format!("({} {} {})", if *forward { ">" } else { "<" }, left.signature(), right.signature())
            }
        }
    }
}

/// A scored complete analysis of an utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parse {
    pub lf: Lf,
    pub ty: SemType,
    /// Content tokens the derivation indexes into (punctuation removed).
    pub tokens: Vec<String>,
    pub derivation: Arc<Derivation>,
    pub skipped: Vec<usize>,
    pub oov: Vec<OovUse>,
    pub score: f64,
}

impl Parse {
    pub fn features(&self) -> Features {
        let mut f = Features::new();
        self.derivation.walk_leaves(&mut |leaf| {
            if let Derivation::Lexical { entry_key, oov, .. } = leaf {
                match oov {
                    Some(o) => {
                        *f.entry(oov_lexical_feature(&o.token, entry_key)).or_insert(0.0) += 1.0;
                        *f.entry(OOV_FEATURE.to_string()).or_insert(0.0) += 1.0;
                        *f.entry(OOV_SIM_FEATURE.to_string()).or_insert(0.0) += o.similarity;
                    }
                    None => *f.entry(lexical_feature(entry_key)).or_insert(0.0) += 1.0,
                }
            }
        });
        if !self.skipped.is_empty() {
            f.insert(SKIP_FEATURE.to_string(), self.skipped.len() as f64);
        }
        f
    }
}

#[derive(Clone)]
struct Item {
    cat: Category,
    lf: Lf,
    ty: SemType,
    score: f64,
    skipped: Vec<usize>,
    n_oov: usize,
    deriv: Arc<Derivation>,
    sig: Arc<str>,
}

fn better(a: &Item, b: &Item) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.skipped.len().cmp(&b.skipped.len()))
        .then(a.n_oov.cmp(&b.n_oov))
        .then_with(|| a.sig.cmp(&b.sig))
}

type CellKey = (Category, Lf, usize);

struct Cell {
    items: HashMap<CellKey, Item>,
}

impl Cell {
    fn new() -> Self {
        Cell { items: HashMap::new() }
    }

    fn offer(&mut self, item: Item) {
        let key = (item.cat.clone(), item.lf.clone(), item.skipped.len());
        match self.items.get(&key) {
            Some(existing) if better(existing, &item) != Ordering::Greater => {}
            _ => {
                self.items.insert(key, item);
            }
        }
    }

    fn finish(self, cap: usize) -> Vec<Item> {
        let mut v: Vec<Item> = self.items.into_values().collect();
        v.sort_by(better);
        v.truncate(cap);
        v
    }
}

fn skip_signature(sig: &str, idx: usize) -> Arc<str> {
    Arc::from(format!("{sig}-{idx}"))
}

impl Parser {
    /// Every complete parse with a root accepted by `root`, best first,
    /// one per distinct logical form.
    pub fn parse_all(&self, tokens: &[String], root: &RootTarget) -> Vec<Parse> {
        self.parse_filtered(tokens, root, &BTreeSet::new())
    }

    /// Like [`Parser::parse_all`], dropping tokens in `ignore` before
    /// parsing (they are not charged as skips).
    pub fn parse_filtered(&self, tokens: &[String], root: &RootTarget, ignore: &BTreeSet<String>) -> Vec<Parse> {
        let content: Vec<String> = tokens
            .iter()
            .filter(|t| !is_punctuation(t) && !ignore.contains(t.as_str()))
            .cloned()
            .collect();
        let n = content.len();
        if n == 0 {
            return Vec::new();
        }
        let cfg = self.config();
        let max_len = self.lexicon().max_phrase_len().max(1);
        let w = self.weights();
        let skip_w = w.get(SKIP_FEATURE);

        let oov: Vec<Vec<OovCandidate>> = content
            .iter()
            .map(|t| oov_candidates(t, self.lexicon(), self.embeddings(), cfg.oov_threshold))
            .collect();

        // chart[i][len] holds items for span [i, i + len).
        let mut chart: Vec<Vec<Vec<Item>>> = vec![vec![Vec::new(); n + 1]; n];
        for len in 1..=n {
            for i in 0..=(n - len) {
                let j = i + len;
                let mut cell = Cell::new();
                if len <= max_len {
                    for entry in self.lexicon().lookup(&content[i..j]) {
                        let key = entry.key();
                        let Some(ty) = self.entry_type(&key) else { continue };
                        let deriv = Arc::new(Derivation::Lexical {
                            start: i,
                            end: j,
                            entry_key: key.clone(),
                            category: entry.category.clone(),
                            oov: None,
                        });
                        cell.offer(Item {
                            cat: entry.category.clone(),
                            lf: entry.lf.clone(),
                            ty: ty.clone(),
                            score: w.get(&lexical_feature(&key)),
                            skipped: Vec::new(),
                            n_oov: 0,
                            sig: Arc::from(deriv.signature()),
                            deriv,
                        });
                    }
                }
                if len == 1 {
                    for cand in &oov[i] {
                        let Some(ty) = self.entry_type(&cand.source_key) else { continue };
                        let use_ = OovUse {
                            token_index: i,
                            token: content[i].clone(),
                            known_word: cand.known_word.clone(),
                            similarity: cand.similarity,
                        };
                        let score = w.get(&oov_lexical_feature(&content[i], &cand.source_key))
                            + w.get(OOV_FEATURE)
                            + w.get(OOV_SIM_FEATURE) * cand.similarity;
                        let deriv = Arc::new(Derivation::Lexical {
                            start: i,
                            end: j,
                            entry_key: cand.source_key.clone(),
                            category: cand.entry.category.clone(),
                            oov: Some(use_),
                        });
                        cell.offer(Item {
                            cat: cand.entry.category.clone(),
                            lf: cand.entry.lf.clone(),
                            ty: ty.clone(),
                            score,
                            skipped: Vec::new(),
                            n_oov: 1,
                            sig: Arc::from(deriv.signature()),
                            deriv,
                        });
                    }
                }
                for k in (i + 1)..j {
                    let (left, right) = (&chart[i][k - i], &chart[k][j - k]);
                    for l in left {
                        for r in right {
                            if l.skipped.len() + r.skipped.len() > cfg.max_skips {
                                continue;
                            }
                            if let Some(item) = combine(l, r) {
                                cell.offer(item);
                            }
                        }
                    }
                }
                if len >= 2 {
                    // Skip token i or token j - 1 at the edge of a shorter span.
                    for (src, skip_idx) in [(&chart[i + 1][len - 1], i), (&chart[i][len - 1], j - 1)] {
                        for it in src {
                            if it.skipped.len() >= cfg.max_skips {
                                continue;
                            }
                            let mut skipped = it.skipped.clone();
                            skipped.push(skip_idx);
                            skipped.sort_unstable();
                            cell.offer(Item {
                                skipped,
                                score: it.score + skip_w,
                                sig: skip_signature(&it.sig, skip_idx),
                                ..it.clone()
                            });
                        }
                    }
                }
                chart[i][len] = cell.finish(cfg.cell_cap);
            }
        }

        let mut roots: Vec<(Item, Lf, SemType)> = chart[0][n]
            .iter()
            .filter_map(|it| root.accept(&it.cat, &it.ty, &it.lf).map(|(lf, ty)| (it.clone(), lf, ty)))
            .collect();
        roots.sort_by(|a, b| better(&a.0, &b.0));
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (it, lf, ty) in roots {
            if !seen.insert(lf.clone()) {
                continue;
            }
            let mut oov_uses = Vec::new();
            it.deriv.walk_leaves(&mut |leaf| {
                if let Derivation::Lexical { oov: Some(o), .. } = leaf {
                    oov_uses.push(o.clone());
                }
            });
            out.push(Parse {
                lf,
                ty,
                tokens: content.clone(),
                derivation: it.deriv.clone(),
                skipped: it.skipped.clone(),
                oov: oov_uses,
                score: it.score,
            });
        }
        out
    }
}

fn combine(l: &Item, r: &Item) -> Option<Item> {
    let (forward, result) = match (&l.cat, &r.cat) {
        (Category::Fwd(res, arg), _) if **arg == r.cat => (true, (**res).clone()),
        (_, Category::Bwd(res, arg)) if **arg == l.cat => (false, (**res).clone()),
        _ => return None,
    };
    let (func, arg) = if forward { (l, r) } else { (r, l) };
    let SemType::Fn(arg_ty, res_ty) = &func.ty else { return None };
    if **arg_ty != arg.ty {
        return None;
    }
    let lf = func.lf.apply_to(&arg.lf);
    let (start, _) = l.deriv.span();
    let (_, end) = r.deriv.span();
    let mut skipped = l.skipped.clone();
    skipped.extend(&r.skipped);
    skipped.sort_unstable();
    let deriv = Arc::new(Derivation::Apply {
        forward,
        start: start.min(l.skipped.first().copied().unwrap_or(start)),
        end: end.max(r.skipped.last().map(|s| s + 1).unwrap_or(end)),
        left: l.deriv.clone(),
        right: r.deriv.clone(),
    });
    Some(Item {
        cat: result,
        lf,
        ty: (**res_ty).clone(),
        score: l.score + r.score,
        skipped,
        n_oov: l.n_oov + r.n_oov,
        sig: Arc::from(format!("({} {} {})", if forward { ">" } else { "<" }, l.sig, r.sig)),
        deriv,
    })
}
