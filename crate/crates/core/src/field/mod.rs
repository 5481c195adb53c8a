//! Vector fields given by expression strings, evaluated over intervals and
//! differentiated by Taylor-mode automatic differentiation.

mod parser;
mod taylor;

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::linalg::{IMat, IVec};

pub use taylor::Jets;

/// One node of the expression DAG. Children always have smaller indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Literal with its outward enclosure and the source text it came from.
    Const { value: Interval, text: String },
    Param(usize),
    Var(usize),
    Time,
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Sqr(usize),
    Sin(usize),
    Cos(usize),
    Exp(usize),
    Sqrt(usize),
}

/// Hash-consing node store: structurally equal nodes are shared.
#[derive(Default)]
pub(crate) struct Builder {
    nodes: Vec<Node>,
}

impl Builder {
    pub(crate) fn add(&mut self, node: Node) -> usize {
        if let Some(i) = self.nodes.iter().position(|n| *n == node) {
            return i;
        }
        self.nodes.push(node);
        self.nodes.len() - 1
    }
}

/// Drops nodes not reachable from any output (e.g. the base of `u^0`) and
/// renumbers the rest, keeping children before parents.
fn prune(nodes: Vec<Node>, outputs: Vec<usize>) -> (Vec<Node>, Vec<usize>) {
    let mut live = vec![false; nodes.len()];
    for &o in &outputs {
        live[o] = true;
    }
    for i in (0..nodes.len()).rev() {
        if !live[i] {
            continue;
        }
        match nodes[i] {
            Node::Neg(a) | Node::Sqr(a) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) | Node::Sqrt(a) => live[a] = true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                live[a] = true;
                live[b] = true;
            }
            _ => {}
        }
    }
    let mut remap = vec![usize::MAX; nodes.len()];
    let mut kept = Vec::new();
    for (i, node) in nodes.into_iter().enumerate() {
        if !live[i] {
            continue;
        }
        let m = |a: usize| remap[a];
        let node = match node {
            Node::Neg(a) => Node::Neg(m(a)),
            Node::Sqr(a) => Node::Sqr(m(a)),
            Node::Sin(a) => Node::Sin(m(a)),
            Node::Cos(a) => Node::Cos(m(a)),
            Node::Exp(a) => Node::Exp(m(a)),
            Node::Sqrt(a) => Node::Sqrt(m(a)),
            Node::Add(a, b) => Node::Add(m(a), m(b)),
            Node::Sub(a, b) => Node::Sub(m(a), m(b)),
            Node::Mul(a, b) => Node::Mul(m(a), m(b)),
            Node::Div(a, b) => Node::Div(m(a), m(b)),
            leaf => leaf,
        };
        remap[i] = kept.len();
        kept.push(node);
    }
    let outputs = outputs.into_iter().map(|o| remap[o]).collect();
    (kept, outputs)
}

/// A parsed, parameter-dependent, possibly time-dependent vector field.
#[derive(Debug, Clone)]
pub struct VectorField {
    source: String,
    nodes: Vec<Node>,
    outputs: Vec<usize>,
    var_names: Vec<String>,
    par_names: Vec<String>,
    time_name: Option<String>,
    params: Vec<Interval>,
}

impl VectorField {
    /// Parses `par:...;time:...;var:...;fun:...;`. Parameters start at zero
    /// and are set with [`VectorField::set_parameter`].
    pub fn parse(source: &str) -> Result<Self> {
        let sections = parser::split_sections(source)?;
        let scope = parser::Scope {
            par: sections.par.iter().map(|p| p.1).collect(),
            time: sections.time.map(|t| t.1),
            var: sections.var.iter().map(|v| v.1).collect(),
        };
        let mut builder = Builder::default();
        let mut outputs = Vec::with_capacity(sections.fun.len());
        for &(pos, text) in &sections.fun {
            if text.is_empty() {
                return Err(Error::Syntax { pos, message: "empty component expression".into() });
            }
            outputs.push(parser::ExprParser::new(text, pos, &mut builder, &scope).parse_all()?);
        }
        let (nodes, outputs) = prune(builder.nodes, outputs);
        Ok(VectorField {
            source: source.to_string(),
            nodes,
            outputs,
            var_names: scope.var.iter().map(|s| s.to_string()).collect(),
            par_names: scope.par.iter().map(|s| s.to_string()).collect(),
            time_name: scope.time.map(str::to_string),
            params: vec![Interval::ZERO; sections.par.len()],
        })
    }

    pub fn dim(&self) -> usize {
        self.outputs.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn is_autonomous(&self) -> bool {
        !self.nodes.iter().any(|n| matches!(n, Node::Time))
    }

    pub fn parameters(&self) -> impl Iterator<Item = (&str, Interval)> {
        self.par_names.iter().map(String::as_str).zip(self.params.iter().copied())
    }

    pub fn parameter(&self, name: &str) -> Option<Interval> {
        self.par_names.iter().position(|p| p == name).map(|i| self.params[i])
    }

    pub fn set_parameter(&mut self, name: &str, value: Interval) -> Result<()> {
        let i = self
            .par_names
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::UnknownIdentifier { pos: 0, name: name.to_string() })?;
        self.params[i] = value;
        Ok(())
    }

    pub fn with_parameter(mut self, name: &str, value: Interval) -> Result<Self> {
        self.set_parameter(name, value)?;
        Ok(self)
    }

    fn check_dim(&self, x: &IVec) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("field of dimension {} evaluated at {} values", self.dim(), x.len())));
        }
        Ok(())
    }

    /// Enclosure of `f(t, x)` over all parameter selections.
    pub fn eval(&self, t: Interval, x: &IVec) -> Result<IVec> {
        self.check_dim(x)?;
        Ok(taylor::evaluate(self, t, x, 1, None)?.x.swap_remove(1))
    }

    /// Entrywise enclosure of `D_x f` over `x`.
    pub fn jacobian(&self, t: Interval, x: &IVec) -> Result<IMat> {
        self.check_dim(x)?;
        let jets = taylor::evaluate(self, t, x, 1, Some(&IMat::identity(self.dim())))?;
        Ok(jets.v.expect("tangents requested").swap_remove(1))
    }

    /// Normalized Taylor coefficients `x_[0..=p]` of the solution through
    /// `x0` at time `t0`.
    pub fn ode_taylor(&self, t0: Interval, x0: &IVec, p: usize) -> Result<Vec<IVec>> {
        self.check_dim(x0)?;
        Ok(taylor::evaluate(self, t0, x0, p, None)?.x)
    }

    /// Solution coefficients together with the coefficients `V_[0..=p]` of
    /// the variational equation `V' = D_x f · V`, `V(t0) = v0`.
    pub fn variational_taylor(&self, t0: Interval, x0: &IVec, v0: &IMat, p: usize) -> Result<Jets> {
        self.check_dim(x0)?;
        if v0.rows() != self.dim() {
            return Err(Error::DimensionMismatch("initial variational matrix".into()));
        }
        taylor::evaluate(self, t0, x0, p, Some(v0))
    }

    /// Plain binary64 evaluation at parameter midpoints (nonrigorous).
    pub fn eval_f64(&self, t: f64, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_f64_into(t, x, &mut Vec::new(), &mut out);
        out
    }

    /// Allocation-free variant of [`VectorField::eval_f64`] with caller-owned
    /// scratch.
    pub fn eval_f64_into(&self, t: f64, x: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) {
        scratch.clear();
        for node in &self.nodes {
            let v = match *node {
                Node::Const { value, .. } => value.mid(),
                Node::Param(i) => self.params[i].mid(),
                Node::Var(i) => x[i],
                Node::Time => t,
                Node::Neg(a) => -scratch[a],
                Node::Add(a, b) => scratch[a] + scratch[b],
                Node::Sub(a, b) => scratch[a] - scratch[b],
                Node::Mul(a, b) => scratch[a] * scratch[b],
                Node::Div(a, b) => scratch[a] / scratch[b],
                Node::Sqr(a) => scratch[a] * scratch[a],
                Node::Sin(a) => scratch[a].sin(),
                Node::Cos(a) => scratch[a].cos(),
                Node::Exp(a) => scratch[a].exp(),
                Node::Sqrt(a) => scratch[a].sqrt(),
            };
            scratch.push(v);
        }
        for (o, &i) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[i];
        }
    }

    /// Renders node `i` back into the expression language.
    pub fn render_node(&self, i: usize) -> String {
        let r = |j: usize| self.render_node(j);
        match &self.nodes[i] {
            Node::Const { text, .. } => text.clone(),
            Node::Param(k) => self.par_names[*k].clone(),
            Node::Var(k) => self.var_names[*k].clone(),
            Node::Time => self.time_name.clone().unwrap_or_else(|| "t".into()),
            Node::Neg(a) => format!("(-{})", r(*a)),
            Node::Add(a, b) => format!("({}+{})", r(*a), r(*b)),
            Node::Sub(a, b) => format!("({}-{})", r(*a), r(*b)),
            Node::Mul(a, b) => format!("({}*{})", r(*a), r(*b)),
            Node::Div(a, b) => format!("({}/{})", r(*a), r(*b)),
            Node::Sqr(a) => format!("({})^2", r(*a)),
            Node::Sin(a) => format!("sin({})", r(*a)),
            Node::Cos(a) => format!("cos({})", r(*a)),
            Node::Exp(a) => format!("exp({})", r(*a)),
            Node::Sqrt(a) => format!("sqrt({})", r(*a)),
        }
    }

    /// Canonical source text; parsing it yields the same DAG.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if !self.par_names.is_empty() {
            let _ = write!(s, "par:{};", self.par_names.join(","));
        }
        if let Some(t) = &self.time_name {
            let _ = write!(s, "time:{t};");
        }
        let _ = write!(s, "var:{};", self.var_names.join(","));
        let funs: Vec<String> = self.outputs.iter().map(|&o| self.render_node(o)).collect();
        let _ = write!(s, "fun:{};", funs.join(","));
        s
    }

    /// SHA-256 over the source text and the current parameter enclosures.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.source.as_bytes());
        for (name, value) in self.parameters() {
            hasher.update(format!(";{name}={value}").as_bytes());
        }
        hasher.finalize().iter().fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }
}
