use std::collections::HashMap;

use crate::class::FunctionClass;
use crate::error::{Error, Result};

/// Ordered list of classes with confidence levels `t_k` and weights
/// `p_k = e^{-t_k}`.
#[derive(Debug, Clone)]
pub struct ModelFamily<P> {
    classes: Vec<FunctionClass<P>>,
    t_schedule: Vec<f64>,
    nested: bool,
}

impl<P> ModelFamily<P> {
    pub fn new(classes: Vec<FunctionClass<P>>, t_schedule: Vec<f64>) -> Result<Self> {
        if classes.is_empty() || classes.len() != t_schedule.len() {
            return Err(Error::BadParams("need one confidence level per class".into()));
        }
        if t_schedule.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::BadParams("confidence levels must be positive".into()));
        }
        let nested = classes.windows(2).all(|w| {
            let outer: Vec<&str> = w[1].labels();
            w[0].labels().iter().all(|l| outer.contains(l))
        });
        Ok(Self { classes, t_schedule, nested })
    }

    /// Same confidence level `t` for every class.
    pub fn uniform(classes: Vec<FunctionClass<P>>, t: f64) -> Result<Self> {
        let k = classes.len();
        Self::new(classes, vec![t; k])
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn classes(&self) -> &[FunctionClass<P>] {
        &self.classes
    }

    pub fn t_schedule(&self) -> &[f64] {
        &self.t_schedule
    }

    pub fn p_schedule(&self) -> Vec<f64> {
        self.t_schedule.iter().map(|t| (-t).exp()).collect()
    }

    /// True when every class contains the previous one (by member label).
    pub fn is_nested(&self) -> bool {
        self.nested
    }

    /// Union of all classes (first occurrence order) and, per class, the
    /// indices of its members in the union.
    pub fn universe(&self) -> Result<(FunctionClass<P>, Vec<Vec<usize>>)> {
        let mut slots: HashMap<String, usize> = HashMap::new();
        let mut picks: Vec<(usize, usize)> = Vec::new();
        let mut maps = Vec::with_capacity(self.classes.len());
        for (k, class) in self.classes.iter().enumerate() {
            let mut map = Vec::with_capacity(class.len());
            for (i, label) in class.labels().into_iter().enumerate() {
                let next = picks.len();
                let slot = *slots.entry(label.to_owned()).or_insert_with(|| {
                    picks.push((k, i));
                    next
                });
                map.push(slot);
            }
            maps.push(map);
        }
        let parts: Vec<FunctionClass<P>> =
            picks.iter().map(|&(k, i)| self.classes[k].subset(&[i])).collect::<Result<_>>()?;
        Ok((FunctionClass::concat(&parts)?, maps))
    }
}
