//! Python bindings: load designs, drive a simulation, read values back.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyKeyError, PyValueError};
use pyo3::prelude::*;

use vhdlkern::cli::parse_value;
use vhdlkern::corpus::vec_u64;
use vhdlkern::desugar::LowerOptions;
use vhdlkern::frontend::{load_registry, load_sources, LoadError, Loaded, SourceUnit};
use vhdlkern::kernel::SimConfig;
use vhdlkern::logic9::{self, Logic9};
use vhdlkern::sim;
use vhdlkern::values::{Scalar, Val};

create_exception!(
    pyvhdlkern,
    SourceError,
    PyException,
    "The VHDL sources could not be loaded."
);
create_exception!(
    pyvhdlkern,
    SimulationError,
    PyException,
    "The simulation stopped with an error."
);

fn source_err(e: LoadError) -> PyErr {
    SourceError::new_err(e.render(false))
}

fn sim_err(e: vhdlkern::error::SimError) -> PyErr {
    SimulationError::new_err(e.to_string())
}

/// A simulation of one top-level design.
#[pyclass(module = "pyvhdlkern")]
pub struct Simulator {
    inner: sim::Simulator,
    warnings: Vec<String>,
}

impl Simulator {
    fn build(loaded: Loaded, top: Option<&str>, cfg: SimConfig) -> PyResult<Simulator> {
        let top = match top {
            Some(t) => t.to_string(),
            None => loaded
                .default_top()
                .ok_or_else(|| PyValueError::new_err("no unique top-level design; pass `top`"))?,
        };
        let warnings = loaded.warnings.iter().map(|d| d.message.clone()).collect();
        let inner = sim::Simulator::new(Arc::new(loaded.registry), &top, cfg).map_err(sim_err)?;
        Ok(Simulator { inner, warnings })
    }
}

fn config(clock: Option<String>, delta_limit: usize, loop_budget: u64) -> SimConfig {
    SimConfig {
        clock,
        delta_limit,
        loop_budget,
        ..SimConfig::default()
    }
}

#[pymethods]
impl Simulator {
    /// Loads VHDL files and prepares `top` (or the only uninstantiated design).
    #[new]
    #[pyo3(signature = (paths, top=None, clock=None, delta_limit=1000, loop_budget=100000))]
    fn new(
        paths: Vec<PathBuf>,
        top: Option<&str>,
        clock: Option<String>,
        delta_limit: usize,
        loop_budget: u64,
    ) -> PyResult<Simulator> {
        let loaded = load_registry(&paths, LowerOptions::default()).map_err(source_err)?;
        Simulator::build(loaded, top, config(clock, delta_limit, loop_budget))
    }

    /// Same as the constructor, from VHDL text.
    #[staticmethod]
    #[pyo3(signature = (text, top=None, clock=None, delta_limit=1000, loop_budget=100000))]
    fn from_source(
        text: &str,
        top: Option<&str>,
        clock: Option<String>,
        delta_limit: usize,
        loop_budget: u64,
    ) -> PyResult<Simulator> {
        let src = SourceUnit::new("<string>", text);
        let loaded = load_sources(vec![src], LowerOptions::default()).map_err(source_err)?;
        Simulator::build(loaded, top, config(clock, delta_limit, loop_budget))
    }

    /// Schedules a stimulus for the next cycle. Accepts int, bool or the
    /// textual forms used in run specs (`'1'`, `"0101"`, `0x1f`).
    fn set(&mut self, name: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let ty = self
            .inner
            .model()
            .sigprts
            .get(name)
            .map(|sp| sp.ty.clone())
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
        let text = if let Ok(b) = value.extract::<bool>() {
            (if b { "1" } else { "0" }).to_string()
        } else if let Ok(i) = value.extract::<i64>() {
            i.to_string()
        } else {
            value.extract::<String>()?
        };
        let v = parse_value(&ty, &text).map_err(PyValueError::new_err)?;
        self.inner.set(name, v).map_err(sim_err)
    }

    /// Runs one cycle; returns the number of delta iterations.
    fn step(&mut self) -> PyResult<usize> {
        self.inner.step().map_err(sim_err)
    }

    fn run(&mut self, cycles: u64) -> PyResult<()> {
        self.inner.run(cycles).map_err(sim_err)
    }

    /// Value text as printed in dumps (`'1'`, `"0101"`, `42`).
    fn value(&self, name: &str) -> PyResult<String> {
        self.lookup(name).map(|v| v.to_string())
    }

    /// Integers, booleans and bits as Python values; bit vectors as
    /// unsigned integers. `None` for anything with metavalues.
    fn int_value(&self, name: &str) -> PyResult<Option<i64>> {
        let v = self.lookup(name)?;
        Ok(match v {
            Val::Scalar(Scalar::Int(i)) => Some(*i),
            Val::Scalar(Scalar::Bool(b) | Scalar::Bit(b)) => Some(*b as i64),
            Val::Scalar(Scalar::Logic(l)) => l.to_bool().map(i64::from),
            v if v.is_vector() => vec_u64(v).map(|u| u as i64),
            _ => None,
        })
    }

    /// Names of the top design's signals and ports.
    fn signals(&self) -> Vec<String> {
        self.inner.state().sp.keys().cloned().collect()
    }

    /// All top-level signals and ports as `{name: value text}`.
    fn values(&self) -> std::collections::BTreeMap<String, String> {
        self.inner
            .state()
            .sp
            .iter()
            .map(|(n, v)| (n.clone(), v.to_string()))
            .collect()
    }

    fn dump(&self) -> String {
        self.inner.dump()
    }

    #[getter]
    fn cycle(&self) -> u64 {
        self.inner.cycle
    }

    #[getter]
    fn last_deltas(&self) -> usize {
        self.inner.last_deltas
    }

    #[getter]
    fn top(&self) -> String {
        self.inner.model().name().to_string()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.warnings.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Simulator(top={:?}, cycle={})",
            self.inner.model().name(),
            self.inner.cycle
        )
    }
}

impl Simulator {
    fn lookup(&self, name: &str) -> PyResult<&Val> {
        self.inner
            .value(name)
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }
}

/// Resolves a string of `std_logic` driver values, e.g. `resolve("0Z")`.
#[pyfunction]
fn resolve(drivers: &str) -> PyResult<String> {
    let ls = drivers
        .chars()
        .map(|c| Logic9::from_char(c).ok_or_else(|| PyValueError::new_err(format!("not a std_logic value: {c:?}"))))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(logic9::resolve(&ls).to_char().to_string())
}

#[pymodule]
fn pyvhdlkern(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Simulator>()?;
    m.add_function(wrap_pyfunction!(resolve, m)?)?;
    m.add("SourceError", m.py().get_type::<SourceError>())?;
    m.add("SimulationError", m.py().get_type::<SimulationError>())?;
    Ok(())
}
