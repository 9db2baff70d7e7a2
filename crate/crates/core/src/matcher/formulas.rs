use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulaError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("entity similarity needs a label or a triple confidence")]
    NoEvidence,
}

fn check(name: &'static str, value: f64) -> Result<f64, FormulaError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(FormulaError::OutOfRange { name, value })
    }
}

/// Inputs shared by the similarity and divergence formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleFactors {
    pub ent: f64,
    pub pred: f64,
    pub fun1: f64,
    pub fun2: f64,
    pub inv1: f64,
    pub inv2: f64,
    pub obj: f64,
}

impl TripleFactors {
    pub fn validate(&self) -> Result<(), FormulaError> {
        check("ent", self.ent)?;
        check("pred", self.pred)?;
        check("fun1", self.fun1)?;
        check("fun2", self.fun2)?;
        check("inv1", self.inv1)?;
        check("inv2", self.inv2)?;
        check("obj", self.obj)?;
        Ok(())
    }

    /// `1 - (1 - p_f)(1 - p_i)` with the given object term.
    pub(crate) fn combine(&self, obj: f64) -> f64 {
        let base = self.ent * self.pred * obj;
        let p_f = base * self.fun1 * self.fun2;
        let p_i = base * self.inv1 * self.inv2;
        1.0 - (1.0 - p_f) * (1.0 - p_i)
    }

    pub fn similarity(&self) -> f64 {
        self.combine(self.obj)
    }

    pub fn divergence(&self) -> f64 {
        self.combine(1.0 - self.obj)
    }
}

pub fn triple_similarity(
    ent: f64,
    pred: f64,
    fun1: f64,
    fun2: f64,
    inv1: f64,
    inv2: f64,
    obj: f64,
) -> Result<f64, FormulaError> {
    let f = TripleFactors { ent, pred, fun1, fun2, inv1, inv2, obj };
    f.validate()?;
    Ok(f.similarity())
}

pub fn triple_divergence(
    ent: f64,
    pred: f64,
    fun1: f64,
    fun2: f64,
    inv1: f64,
    inv2: f64,
    obj: f64,
) -> Result<f64, FormulaError> {
    let f = TripleFactors { ent, pred, fun1, fun2, inv1, inv2, obj };
    f.validate()?;
    Ok(f.divergence())
}

/// `1 - prod(1 - c)`, summed as `log1p(-c)` so long chains of small
/// confidences do not underflow. Any confidence of 1 gives exactly 1.
pub fn entity_similarity_from_triples<I: IntoIterator<Item = f64>>(compats: I) -> f64 {
    let mut log_rest = 0.0;
    for c in compats {
        let c = c.clamp(0.0, 1.0);
        if c >= 1.0 {
            return 1.0;
        }
        log_rest += (-c).ln_1p();
    }
    (-log_rest.exp_m1()).clamp(0.0, 1.0)
}

/// Both present: the mean. Label only: half the label confidence. Triple
/// only: the mean of the label embedding similarity and the triple
/// confidence.
pub fn combine_entity_similarity(
    c_l: Option<f64>,
    c_t: Option<f64>,
    embedding_sim: impl FnOnce() -> f64,
) -> Result<f64, FormulaError> {
    match (c_l, c_t) {
        (Some(l), Some(t)) => Ok((check("c_l", l)? + check("c_t", t)?) / 2.0),
        (Some(l), None) => Ok(0.5 * check("c_l", l)?),
        (None, Some(t)) => Ok((embedding_sim().clamp(0.0, 1.0) + check("c_t", t)?) / 2.0),
        (None, None) => Err(FormulaError::NoEvidence),
    }
}
