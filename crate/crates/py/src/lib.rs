use pyo3::prelude::*;
#[pymodule]
fn monosynth_py(_m: &Bound<PyModule>) -> PyResult<()> { Ok(()) }
