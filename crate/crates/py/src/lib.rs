//! Python bindings. Results come back as lists of `(key, value)` string
//! pairs in the same order as the CLI's machine format.

use std::str::FromStr;

use borncoarse::actions::classify as classify_instance;
use borncoarse::associated::{verify_theorem_main, verify_theorem_transitive, verify_theorem_weak};
use borncoarse::cli::{run_command, transitive_structure};
use borncoarse::instance::{parse_instance, serialize_instance, InstanceFile};
use borncoarse::oracle::{cross_check, random_instance as random, Primitive, Profile};
use borncoarse::report::{self, Report};
use borncoarse::Budget;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

type Fields = Vec<(String, String)>;

fn err(e: borncoarse::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse(text: &str) -> PyResult<InstanceFile> {
    parse_instance(text).map_err(err)
}

fn fields(r: Report) -> Fields {
    let mut out = vec![("report".to_string(), r.title)];
    out.extend(r.fields);
    out
}

/// Parses instance text and returns its canonical serialization.
#[pyfunction]
fn normalize(text: &str) -> PyResult<String> {
    Ok(serialize_instance(&parse(text)?))
}

#[pyfunction]
#[pyo3(signature = (text, window = 64, max_index = 8))]
fn classify(text: &str, window: i64, max_index: u32) -> PyResult<Fields> {
    let f = parse(text)?;
    let c = classify_instance(&f.instance, &Budget::new(window, max_index)).map_err(err)?;
    Ok(fields(report::classification_report(&f.instance, &c)))
}

/// Runs `weak`, `main` or `transitive` on an instance.
#[pyfunction]
#[pyo3(signature = (text, which, window = 64, max_index = 8))]
fn theorem(text: &str, which: &str, window: i64, max_index: u32) -> PyResult<Fields> {
    let f = parse(text)?;
    let budget = Budget::new(window, max_index);
    let t = match which {
        "weak" => verify_theorem_weak(&f.instance, &budget),
        "main" => {
            let cands: Vec<_> = f.candidates.iter().map(|(_, c)| c.clone()).collect();
            verify_theorem_main(&f.instance, &cands, &budget)
        }
        "transitive" => transitive_structure(&f).and_then(|cs| verify_theorem_transitive(&f.instance, &cs, &budget)),
        other => return Err(PyValueError::new_err(format!("unknown theorem {other:?}"))),
    }
    .map_err(err)?;
    Ok(fields(report::theorem_report(&t)))
}

/// Compares every primitive with the brute-force oracle.
#[pyfunction]
#[pyo3(signature = (texts, window = 32, primitives = None))]
fn crosscheck(texts: Vec<String>, window: i64, primitives: Option<Vec<String>>) -> PyResult<Fields> {
    let instances = texts.iter().map(|t| parse(t).map(|f| f.instance)).collect::<PyResult<Vec<_>>>()?;
    let selected = match primitives {
        None => Primitive::ALL.to_vec(),
        Some(names) => names.iter().map(|n| Primitive::from_str(n)).collect::<Result<_, _>>().map_err(err)?,
    };
    let reports = cross_check(&instances, &selected, window).map_err(err)?;
    Ok(fields(report::crosscheck_report(&reports)))
}

/// A reproducible random instance, serialized.
#[pyfunction]
fn random_instance(seed: u64, profile: &str) -> PyResult<String> {
    let p = Profile::from_str(profile).map_err(err)?;
    let a = random(seed, p).map_err(err)?;
    Ok(serialize_instance(&InstanceFile { instance: a, candidates: Vec::new(), expect: None }))
}

/// Runs the command line in-process; returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let (mut out, mut errs) = (Vec::new(), Vec::new());
    let argv = std::iter::once("borncoarse".to_string()).chain(args);
    let code = run_command(argv, &mut out, &mut errs);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&errs).into_owned())
}

#[pymodule]
fn borncoarse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(theorem, m)?)?;
    m.add_function(wrap_pyfunction!(crosscheck, m)?)?;
    m.add_function(wrap_pyfunction!(random_instance, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
