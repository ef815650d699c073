//! Python bindings: datum loading and building, every command verb, and the
//! finite-group primitives.

use std::path::PathBuf;

use bl_duality::error::BlError;
use bl_duality::finite::{
    bl_constant_finite, bl_functional, convolution_limit, convolve, enumerate_subgroups_nonabelian, FiniteConfig,
    FiniteGroupTable, IterationConfig, DEFAULT_FINITE_ORDER_CAP,
};
use bl_duality::io::record::ValueRecord;
use bl_duality::io::{
    datum_digest, parse_datum, parse_datum_str, run_command, serialize_datum, Datum as CoreDatum, Flags,
    ParsedDatum, Verb,
};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::{json, Value};

create_exception!(blduality, BLDualityError, PyValueError);

fn err(e: BlError) -> PyErr {
    BLDualityError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| BLDualityError::new_err(e.to_string()))
}

/// Exponents given as strings ("3/2", "inf") or integers.
fn exponent_strings(items: &[Bound<'_, PyAny>]) -> PyResult<Vec<String>> {
    items.iter().map(|x| Ok(x.str()?.to_string())).collect()
}

/// A validated datum of kind `discrete`, `euclidean`, or `finite-table`.
#[pyclass(module = "blduality", frozen)]
struct Datum {
    inner: ParsedDatum,
}

impl Datum {
    fn from_value(v: Value) -> PyResult<Self> {
        Ok(Datum {
            inner: parse_datum_str(&v.to_string(), None).map_err(err)?,
        })
    }
}

#[pymethods]
impl Datum {
    /// Reads a datum file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Datum {
            inner: parse_datum(&path).map_err(err)?,
        })
    }

    /// Parses datum JSON text. Relative table paths resolve against `base`.
    #[staticmethod]
    #[pyo3(signature = (text, base=None))]
    fn from_json(text: &str, base: Option<PathBuf>) -> PyResult<Self> {
        Ok(Datum {
            inner: parse_datum_str(text, base.as_deref()).map_err(err)?,
        })
    }

    /// Builds a datum from a dict in the file schema.
    #[staticmethod]
    fn from_dict(obj: &Bound<'_, PyAny>) -> PyResult<Self> {
        Self::from_value(from_py(obj)?)
    }

    /// `groups` holds `(free_rank, torsion)` pairs; `generators` are integer
    /// rows in concatenated coordinates.
    #[staticmethod]
    fn discrete(
        groups: Vec<(usize, Vec<u64>)>,
        generators: Vec<Vec<i64>>,
        exponents: Vec<Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let groups: Vec<Value> = groups
            .into_iter()
            .map(|(free_rank, torsion)| json!({"free_rank": free_rank, "torsion": torsion}))
            .collect();
        Self::from_value(json!({
            "schema_version": 1,
            "kind": "discrete",
            "groups": groups,
            "generators": generators,
            "exponents": exponent_strings(&exponents)?,
        }))
    }

    /// `basis` rows may hold integers or rational strings.
    #[staticmethod]
    #[pyo3(signature = (factor_dims, basis, exponents, measure="induced"))]
    fn euclidean(
        factor_dims: Vec<usize>,
        basis: &Bound<'_, PyAny>,
        exponents: Vec<Bound<'_, PyAny>>,
        measure: &str,
    ) -> PyResult<Self> {
        Self::from_value(json!({
            "schema_version": 1,
            "kind": "euclidean",
            "factor_dims": factor_dims,
            "basis": from_py(basis)?,
            "exponents": exponent_strings(&exponents)?,
            "measure": measure,
        }))
    }

    /// Finite groups by name; the subgroup is the diagonal when neither
    /// `generators` nor `elements` is given. Weights are `1/p`.
    #[staticmethod]
    #[pyo3(signature = (groups, weights, generators=None, elements=None))]
    fn finite(
        groups: Vec<String>,
        weights: Vec<Bound<'_, PyAny>>,
        generators: Option<Vec<Vec<usize>>>,
        elements: Option<Vec<Vec<usize>>>,
    ) -> PyResult<Self> {
        let subgroup = match (generators, elements) {
            (Some(g), None) => json!({"generators": g}),
            (None, Some(e)) => json!({"elements": e}),
            (None, None) => json!({"diagonal": true}),
            (Some(_), Some(_)) => return Err(BLDualityError::new_err("give generators or elements, not both")),
        };
        let groups: Vec<Value> = groups.into_iter().map(|name| json!({"name": name})).collect();
        Self::from_value(json!({
            "schema_version": 1,
            "kind": "finite-table",
            "groups": groups,
            "subgroup": subgroup,
            "weights": exponent_strings(&weights)?,
        }))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.datum.kind()
    }

    /// SHA-256 of the canonical form.
    #[getter]
    fn digest(&self) -> PyResult<String> {
        datum_digest(&self.inner.datum).map_err(err)
    }

    /// Normalizations applied while reading.
    #[getter]
    fn diagnostics(&self) -> Vec<String> {
        self.inner.diagnostics.clone()
    }

    /// Canonical JSON.
    fn to_json(&self) -> PyResult<String> {
        Ok(serialize_datum(&self.inner.datum).map_err(err)?.to_string())
    }

    fn __repr__(&self) -> PyResult<String> {
        Ok(format!("Datum(kind={:?}, digest={:?})", self.kind(), &self.digest()?[..12]))
    }
}

/// Runs one command verb and returns its result record as a dict.
#[pyfunction]
#[pyo3(signature = (verb, datum=None, *, seed=0, primes=None, tol=None, cap_torsion=None, cap_rank=None, count=100, trials=20))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    verb: &str,
    datum: Option<&Datum>,
    seed: u64,
    primes: Option<Vec<u64>>,
    tol: Option<f64>,
    cap_torsion: Option<u64>,
    cap_rank: Option<usize>,
    count: usize,
    trials: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let verb: Verb = verb.parse().map_err(err)?;
    let flags = Flags {
        primes,
        seed,
        tol,
        cap_torsion,
        cap_rank,
        count,
        trials,
    };
    let parsed = datum.map(|d| &d.inner);
    let record = py.detach(|| run_command(verb, parsed, &flags)).map_err(err)?;
    to_py(py, &serde_json::to_value(&record).expect("records serialize"))
}

/// The exact constant of a discrete or finite-table datum as
/// `{"exact": {prime: exponent} | "inf", "decimal": str}`.
#[pyfunction]
fn constant<'py>(py: Python<'py>, datum: &Datum) -> PyResult<Bound<'py, PyAny>> {
    let record = run_command(Verb::Constant, Some(&datum.inner), &Flags::default()).map_err(err)?;
    match record.values.get("constant") {
        Some(v) => to_py(py, &serde_json::to_value(v).expect("value serializes")),
        None => Err(BLDualityError::new_err("finiteness could not be certified")),
    }
}

/// `"pass"`, `"fail"`, or `"inconclusive"` for the exact duality check.
#[pyfunction]
fn verify_duality(datum: &Datum) -> PyResult<String> {
    let record = run_command(Verb::VerifyDuality, Some(&datum.inner), &Flags::default()).map_err(err)?;
    Ok(serde_json::to_value(record.status).expect("status").as_str().expect("string").to_string())
}

/// Decimal value of an exact constant map such as `{"2": "1/2", "3": "1/2"}`.
#[pyfunction]
fn exact_to_float(obj: &Bound<'_, PyAny>) -> PyResult<f64> {
    let record = ValueRecord {
        exact: Some(from_py(obj)?),
        decimal: String::new(),
    };
    match record.to_exact().map_err(err)? {
        Some(v) => Ok(v.to_f64()),
        None => Err(BLDualityError::new_err("no exact value")),
    }
}

/// A finite group given by its multiplication table.
#[pyclass(module = "blduality", frozen)]
struct FiniteGroup {
    inner: FiniteGroupTable,
}

#[pymethods]
impl FiniteGroup {
    /// `Z/n`, `Cn`, `Dn`, `Sn` (n ≤ 6), or `Q8`.
    #[staticmethod]
    fn named(name: &str) -> PyResult<Self> {
        Ok(FiniteGroup {
            inner: FiniteGroupTable::named(name).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_table(table: Vec<Vec<usize>>) -> PyResult<Self> {
        Ok(FiniteGroup {
            inner: FiniteGroupTable::from_table(table).map_err(err)?,
        })
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn identity(&self) -> usize {
        self.inner.identity()
    }

    fn table(&self) -> Vec<Vec<usize>> {
        self.inner.table().to_vec()
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.inner.mul(a, b)
    }

    fn inv(&self, a: usize) -> usize {
        self.inner.inv(a)
    }

    fn element_order(&self, x: usize) -> usize {
        self.inner.element_order(x)
    }

    fn is_abelian(&self) -> bool {
        self.inner.is_abelian()
    }

    /// Element lists of all subgroups, sorted by order.
    #[pyo3(signature = (cap=DEFAULT_FINITE_ORDER_CAP))]
    fn subgroups(&self, cap: usize) -> PyResult<Vec<Vec<usize>>> {
        Ok(enumerate_subgroups_nonabelian(&self.inner, cap)
            .map_err(err)?
            .iter()
            .map(|s| s.elements())
            .collect())
    }

    /// `(f * g)(x) = Σ_y f(y) g(x y⁻¹)`.
    fn convolve(&self, f: Vec<f64>, g: Vec<f64>) -> PyResult<Vec<f64>> {
        convolve(&f, &g, &self.inner).map_err(err)
    }

    /// Limit of the convolution powers of a probability vector: returns
    /// `(subgroup elements, limit, effective iterations)`.
    fn convolution_limit(&self, f: Vec<f64>) -> PyResult<(Vec<usize>, Vec<f64>, usize)> {
        let out = convolution_limit(&self.inner, &f, &IterationConfig::default()).map_err(err)?;
        Ok((out.subgroup.elements(), out.limit, out.effective_iterations))
    }

    fn __repr__(&self) -> String {
        format!("FiniteGroup(order={})", self.inner.order())
    }
}

fn finite_datum(datum: &Datum) -> PyResult<&bl_duality::finite::FiniteBLDatum> {
    match &datum.inner.datum {
        CoreDatum::Finite(d) => Ok(d),
        other => Err(BLDualityError::new_err(format!("expected a finite-table datum, got {}", other.kind()))),
    }
}

/// The weighted functional of a finite-table datum at one function per factor.
#[pyfunction]
fn functional(datum: &Datum, fs: Vec<Vec<f64>>) -> PyResult<f64> {
    bl_functional(finite_datum(datum)?, &fs).map_err(err)
}

/// The normalized maximizer family of a finite-table datum: one indicator
/// per factor, scaled to mass 1.
#[pyfunction]
fn extremiser(datum: &Datum) -> PyResult<Vec<Vec<f64>>> {
    let d = finite_datum(datum)?;
    let c = bl_constant_finite(d, &FiniteConfig::default()).map_err(err)?;
    Ok(c
        .extremiser(d)
        .into_iter()
        .map(|f| {
            let m: f64 = f.iter().sum();
            f.into_iter().map(|x| x / m).collect()
        })
        .collect())
}

/// Names of the command verbs.
#[pyfunction]
fn verbs() -> Vec<&'static str> {
    Verb::ALL.iter().map(|v| v.as_str()).collect()
}

#[pymodule]
fn blduality(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Datum>()?;
    m.add_class::<FiniteGroup>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(constant, m)?)?;
    m.add_function(wrap_pyfunction!(verify_duality, m)?)?;
    m.add_function(wrap_pyfunction!(exact_to_float, m)?)?;
    m.add_function(wrap_pyfunction!(functional, m)?)?;
    m.add_function(wrap_pyfunction!(extremiser, m)?)?;
    m.add_function(wrap_pyfunction!(verbs, m)?)?;
    m.add("BLDualityError", m.py().get_type::<BLDualityError>())?;
    Ok(())
}
