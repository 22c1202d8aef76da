//! Python bindings. Configuration errors raise `ValueError`; solver and
//! quadrature failures raise `RuntimeError`.

use std::collections::BTreeMap;

use d2d_offload::analytics::{self, AnalyticsOptions};
use d2d_offload::caching::{self, CachingPolicy};
use d2d_offload::harness::{Command, ExperimentConfig, RawConfig};
use d2d_offload::model::{self, Topology};
use d2d_offload::power::{self, PowerPolicy};
use d2d_offload::sim::{self, SimOptions};
use d2d_offload::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(py_err)
}

#[pyclass(name = "DemandModel", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyDemandModel(model::DemandModel);

#[pymethods]
impl PyDemandModel {
    #[new]
    fn new(catalog_size: usize, zipf_exponent: f64, file_size_bits: f64) -> PyResult<Self> {
        model::DemandModel::new(catalog_size, zipf_exponent, file_size_bits).map(Self).map_err(py_err)
    }

    #[getter]
    fn catalog_size(&self) -> usize {
        self.0.catalog_size
    }

    #[getter]
    fn zipf_exponent(&self) -> f64 {
        self.0.zipf_exponent
    }

    #[getter]
    fn file_size_bits(&self) -> f64 {
        self.0.file_size_bits
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "NetworkConfig", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyNetworkConfig(model::NetworkConfig);

#[pymethods]
impl PyNetworkConfig {
    #[new]
    #[pyo3(signature = (user_density, collaboration_distance, cell_side = 1000.0, topology = "bounded_square"))]
    fn new(user_density: f64, collaboration_distance: f64, cell_side: f64, topology: &str) -> PyResult<Self> {
        let topology: Topology = parse(topology)?;
        model::NetworkConfig::new(user_density, collaboration_distance, cell_side, topology)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn user_density(&self) -> f64 {
        self.0.user_density
    }

    #[getter]
    fn collaboration_distance(&self) -> f64 {
        self.0.collaboration_distance
    }

    #[getter]
    fn cell_side(&self) -> f64 {
        self.0.cell_side
    }

    #[getter]
    fn topology(&self) -> &'static str {
        self.0.topology.name()
    }

    fn with_collaboration_distance(&self, r_c: f64) -> PyResult<Self> {
        let n = self.0.with_collaboration_distance(r_c);
        n.validate().map_err(py_err)?;
        Ok(Self(n))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "RadioConfig", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyRadioConfig(model::RadioConfig);

#[pymethods]
impl PyRadioConfig {
    #[new]
    fn new(
        bandwidth_hz: f64,
        noise_power_w: f64,
        pathloss_db_at_1m: f64,
        pathloss_exponent: f64,
        max_tx_power_w: f64,
        amp_efficiency: f64,
        circuit_power_w: f64,
    ) -> PyResult<Self> {
        let r = model::RadioConfig {
            bandwidth_hz,
            noise_power_w,
            pathloss_db_at_1m,
            pathloss_exponent,
            max_tx_power_w,
            amp_efficiency,
            circuit_power_w,
        };
        r.validate().map_err(py_err)?;
        Ok(Self(r))
    }

    #[getter]
    fn bandwidth_hz(&self) -> f64 {
        self.0.bandwidth_hz
    }

    #[getter]
    fn noise_power_w(&self) -> f64 {
        self.0.noise_power_w
    }

    #[getter]
    fn pathloss_db_at_1m(&self) -> f64 {
        self.0.pathloss_db_at_1m
    }

    #[getter]
    fn pathloss_exponent(&self) -> f64 {
        self.0.pathloss_exponent
    }

    #[getter]
    fn max_tx_power_w(&self) -> f64 {
        self.0.max_tx_power_w
    }

    #[getter]
    fn amp_efficiency(&self) -> f64 {
        self.0.amp_efficiency
    }

    #[getter]
    fn circuit_power_w(&self) -> f64 {
        self.0.circuit_power_w
    }

    fn with_noise_power(&self, noise_power_w: f64) -> PyResult<Self> {
        let r = self.0.with_noise_power(noise_power_w);
        r.validate().map_err(py_err)?;
        Ok(Self(r))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "BatteryConfig", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyBatteryConfig(model::BatteryConfig);

#[pymethods]
impl PyBatteryConfig {
    #[new]
    fn new(capacity_mah: f64, voltage_v: f64) -> PyResult<Self> {
        let b = model::BatteryConfig { capacity_mah, voltage_v };
        b.validate().map_err(py_err)?;
        Ok(Self(b))
    }

    #[getter]
    fn capacity_mah(&self) -> f64 {
        self.0.capacity_mah
    }

    #[getter]
    fn voltage_v(&self) -> f64 {
        self.0.voltage_v
    }

    fn energy_joules(&self) -> f64 {
        self.0.energy_joules()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "CachingDistribution", frozen)]
struct PyCachingDistribution {
    #[pyo3(get)]
    probs: Vec<f64>,
    /// 1-based index of the last file with nonzero caching probability.
    #[pyo3(get)]
    support_index: usize,
    #[pyo3(get)]
    multiplier: f64,
}

impl From<caching::CachingDistribution> for PyCachingDistribution {
    fn from(c: caching::CachingDistribution) -> Self {
        Self { probs: c.probs, support_index: c.support_index, multiplier: c.multiplier }
    }
}

#[pyclass(name = "LinkEnergyResult", frozen)]
struct PyLinkEnergyResult {
    #[pyo3(get)]
    tx_power_w: f64,
    #[pyo3(get)]
    energy_joules: f64,
    #[pyo3(get)]
    rate_bps: f64,
    #[pyo3(get)]
    epsilon: f64,
    #[pyo3(get)]
    at_max_power: bool,
}

#[pyclass(name = "TradeoffPoint", frozen)]
struct PyTradeoffPoint {
    #[pyo3(get)]
    r_c_m: f64,
    #[pyo3(get)]
    offloading_ratio: f64,
    #[pyo3(get)]
    avg_energy_j: f64,
    #[pyo3(get)]
    avg_energy_per_offloaded_j: f64,
    #[pyo3(get)]
    energy_cost_ratio: f64,
    #[pyo3(get)]
    caching_policy: &'static str,
    #[pyo3(get)]
    power_policy: &'static str,
}

#[pyclass(name = "SimReport", frozen)]
struct PySimReport {
    #[pyo3(get)]
    num_realizations: u64,
    #[pyo3(get)]
    num_requests: u64,
    #[pyo3(get)]
    num_offloaded: u64,
    #[pyo3(get)]
    empirical_offloading_ratio: f64,
    #[pyo3(get)]
    empirical_avg_energy_j: f64,
    #[pyo3(get)]
    empirical_avg_energy_per_offloaded_j: f64,
    #[pyo3(get)]
    ci_halfwidth: f64,
    #[pyo3(get)]
    energy_ci_halfwidth: f64,
    #[pyo3(get)]
    mean_link_distance_m: f64,
}

/// Demand, network, radio and battery of the `paper-2015` preset.
#[pyfunction]
fn paper_preset() -> PyResult<(PyDemandModel, PyNetworkConfig, PyRadioConfig, PyBatteryConfig)> {
    let c = ExperimentConfig::preset("paper-2015").map_err(py_err)?;
    Ok((PyDemandModel(c.demand), PyNetworkConfig(c.net), PyRadioConfig(c.radio), PyBatteryConfig(c.battery)))
}

#[pyfunction]
fn dbm_to_watts(dbm: f64) -> f64 {
    model::dbm_to_watts(dbm)
}

#[pyfunction]
fn watts_to_dbm(watts: f64) -> f64 {
    model::watts_to_dbm(watts)
}

#[pyfunction]
fn request_probabilities(demand: PyRef<'_, PyDemandModel>) -> Vec<f64> {
    model::request_probabilities(&demand.0)
}

#[pyfunction]
fn path_gain(radio: PyRef<'_, PyRadioConfig>, distance_m: f64) -> PyResult<f64> {
    model::path_gain(&radio.0, distance_m).map_err(py_err)
}

#[pyfunction]
fn offloading_ratio(demand: PyRef<'_, PyDemandModel>, net: PyRef<'_, PyNetworkConfig>, caching: Vec<f64>) -> PyResult<f64> {
    caching::offloading_ratio(&demand.0, &net.0, &caching).map_err(py_err)
}

#[pyfunction]
fn solve_optimal_caching(demand: PyRef<'_, PyDemandModel>, net: PyRef<'_, PyNetworkConfig>) -> PyResult<PyCachingDistribution> {
    caching::solve_optimal_caching(&demand.0, &net.0).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn uniform_caching(demand: PyRef<'_, PyDemandModel>, net: PyRef<'_, PyNetworkConfig>) -> PyCachingDistribution {
    caching::CachingDistribution::uniform(&demand.0, &net.0).into()
}

#[pyfunction]
#[pyo3(signature = (demand, net, tolerance = 1e-12))]
fn oracle_solve_caching(py: Python<'_>, demand: PyRef<'_, PyDemandModel>, net: PyRef<'_, PyNetworkConfig>, tolerance: f64) -> PyResult<Vec<f64>> {
    let (d, n) = (demand.0, net.0);
    py.detach(|| caching::oracle_solve_caching(&d, &n, tolerance)).map_err(py_err)
}

#[pyfunction]
fn mean_rate(radio: PyRef<'_, PyRadioConfig>, tx_power_w: f64, distance_m: f64) -> PyResult<f64> {
    power::mean_rate(&radio.0, tx_power_w, distance_m).map_err(py_err)
}

#[pyfunction]
fn link_energy(radio: PyRef<'_, PyRadioConfig>, demand: PyRef<'_, PyDemandModel>, tx_power_w: f64, distance_m: f64) -> PyResult<f64> {
    power::link_energy(&radio.0, &demand.0, tx_power_w, distance_m).map_err(py_err)
}

#[pyfunction]
fn solve_optimal_power(radio: PyRef<'_, PyRadioConfig>, demand: PyRef<'_, PyDemandModel>, distance_m: f64) -> PyResult<PyLinkEnergyResult> {
    let r = power::solve_optimal_power(&radio.0, &demand.0, distance_m).map_err(py_err)?;
    Ok(PyLinkEnergyResult {
        tx_power_w: r.tx_power_w,
        energy_joules: r.energy_joules,
        rate_bps: r.rate_bps,
        epsilon: r.epsilon,
        at_max_power: r.at_max_power,
    })
}

#[pyfunction]
fn link_distance_pdf(net: PyRef<'_, PyNetworkConfig>, p_c_i: f64, r: f64) -> f64 {
    analytics::link_distance_pdf(&net.0, p_c_i, r)
}

fn analytics_options(energy_grid_step: Option<f64>) -> AnalyticsOptions {
    AnalyticsOptions { energy_grid_step }
}

/// Average helper energy per request. `energy_grid_step=None` solves the
/// transmit power at every quadrature node.
#[pyfunction]
#[pyo3(signature = (demand, net, radio, caching, power_policy = "optimal", energy_grid_step = Some(analytics::DEFAULT_ENERGY_GRID_STEP)))]
fn average_energy(
    py: Python<'_>,
    demand: PyRef<'_, PyDemandModel>,
    net: PyRef<'_, PyNetworkConfig>,
    radio: PyRef<'_, PyRadioConfig>,
    caching: Vec<f64>,
    power_policy: &str,
    energy_grid_step: Option<f64>,
) -> PyResult<f64> {
    let policy: PowerPolicy = parse(power_policy)?;
    let (d, n, r) = (demand.0, net.0, radio.0);
    let opts = analytics_options(energy_grid_step);
    py.detach(|| analytics::average_energy(&d, &n, &r, &caching, policy, &opts)).map_err(py_err)
}

#[pyfunction]
fn energy_cost_ratio(avg_energy_j: f64, battery: PyRef<'_, PyBatteryConfig>) -> f64 {
    analytics::energy_cost_ratio(avg_energy_j, &battery.0)
}

#[pyfunction]
#[pyo3(signature = (demand, net, r_c_grid, radio, battery, caching_policy = "optimal", power_policy = "optimal", energy_grid_step = Some(analytics::DEFAULT_ENERGY_GRID_STEP)))]
#[allow(clippy::too_many_arguments)]
fn tradeoff_curve(
    py: Python<'_>,
    demand: PyRef<'_, PyDemandModel>,
    net: PyRef<'_, PyNetworkConfig>,
    r_c_grid: Vec<f64>,
    radio: PyRef<'_, PyRadioConfig>,
    battery: PyRef<'_, PyBatteryConfig>,
    caching_policy: &str,
    power_policy: &str,
    energy_grid_step: Option<f64>,
) -> PyResult<Vec<PyTradeoffPoint>> {
    let cp: CachingPolicy = parse(caching_policy)?;
    let pp: PowerPolicy = parse(power_policy)?;
    let (d, n, r, b) = (demand.0, net.0, radio.0, battery.0);
    let opts = analytics_options(energy_grid_step);
    let points = py
        .detach(|| analytics::tradeoff_curve(&d, &n, &r_c_grid, &r, &b, cp, pp, &opts))
        .map_err(py_err)?;
    Ok(points
        .into_iter()
        .map(|p| PyTradeoffPoint {
            r_c_m: p.r_c_m,
            offloading_ratio: p.offloading_ratio,
            avg_energy_j: p.avg_energy_j,
            avg_energy_per_offloaded_j: p.avg_energy_per_offloaded_j,
            energy_cost_ratio: p.energy_cost_ratio,
            caching_policy: p.caching_policy.name(),
            power_policy: p.power_policy.name(),
        })
        .collect())
}

#[pyfunction]
#[pyo3(signature = (demand, net, target, caching_policy = "optimal"))]
fn collaboration_distance_for_ratio(demand: PyRef<'_, PyDemandModel>, net: PyRef<'_, PyNetworkConfig>, target: f64, caching_policy: &str) -> PyResult<f64> {
    let cp: CachingPolicy = parse(caching_policy)?;
    analytics::collaboration_distance_for_ratio(&demand.0, &net.0, cp, target).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (demand, net, radio, caching_policy = "optimal", power_policy = "optimal", num_realizations = 10, master_seed = 0, self_cache_hit = "exclude"))]
#[allow(clippy::too_many_arguments)]
fn run_campaign(
    py: Python<'_>,
    demand: PyRef<'_, PyDemandModel>,
    net: PyRef<'_, PyNetworkConfig>,
    radio: PyRef<'_, PyRadioConfig>,
    caching_policy: &str,
    power_policy: &str,
    num_realizations: u64,
    master_seed: u64,
    self_cache_hit: &str,
) -> PyResult<PySimReport> {
    let cp: CachingPolicy = parse(caching_policy)?;
    let pp: PowerPolicy = parse(power_policy)?;
    let opts = SimOptions { self_cache_hit: parse(self_cache_hit)?, record_links: false };
    let (d, n, r) = (demand.0, net.0, radio.0);
    let rep = py
        .detach(|| sim::run_campaign(&d, &n, &r, cp, pp, num_realizations, master_seed, &opts))
        .map_err(py_err)?;
    Ok(PySimReport {
        num_realizations: rep.num_realizations,
        num_requests: rep.num_requests,
        num_offloaded: rep.num_offloaded,
        empirical_offloading_ratio: rep.empirical_offloading_ratio,
        empirical_avg_energy_j: rep.empirical_avg_energy_j,
        empirical_avg_energy_per_offloaded_j: rep.empirical_avg_energy_per_offloaded_j,
        ci_halfwidth: rep.ci_halfwidth,
        energy_ci_halfwidth: rep.energy_ci_halfwidth,
        mean_link_distance_m: rep.link_distances.mean,
    })
}

/// Runs a CLI command (`cache-dist`, `power`, `tradeoff`, `simulate`,
/// `figures`) on TOML configuration text and returns `{table name: CSV}`.
#[pyfunction]
#[pyo3(signature = (command, config = None, preset = None, seed = None))]
fn run_command(py: Python<'_>, command: &str, config: Option<&str>, preset: Option<&str>, seed: Option<u64>) -> PyResult<BTreeMap<String, String>> {
    let command: Command = parse(command)?;
    let raw = match config {
        Some(text) => RawConfig::parse(text).map_err(py_err)?,
        None => RawConfig::default(),
    };
    let mut cfg = ExperimentConfig::from_layers(raw, preset).map_err(py_err)?;
    if let Some(seed) = seed {
        cfg = cfg.with_seed(seed);
    }
    let out = py.detach(|| command.run(&cfg)).map_err(py_err)?;
    Ok(out.tables.iter().map(|t| (t.name.clone(), t.to_csv())).collect())
}

#[pymodule(name = "d2d_offload")]
fn d2d_offload_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDemandModel>()?;
    m.add_class::<PyNetworkConfig>()?;
    m.add_class::<PyRadioConfig>()?;
    m.add_class::<PyBatteryConfig>()?;
    m.add_class::<PyCachingDistribution>()?;
    m.add_class::<PyLinkEnergyResult>()?;
    m.add_class::<PyTradeoffPoint>()?;
    m.add_class::<PySimReport>()?;
    m.add_function(wrap_pyfunction!(paper_preset, m)?)?;
    m.add_function(wrap_pyfunction!(dbm_to_watts, m)?)?;
    m.add_function(wrap_pyfunction!(watts_to_dbm, m)?)?;
    m.add_function(wrap_pyfunction!(request_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(path_gain, m)?)?;
    m.add_function(wrap_pyfunction!(offloading_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(solve_optimal_caching, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_caching, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_solve_caching, m)?)?;
    m.add_function(wrap_pyfunction!(mean_rate, m)?)?;
    m.add_function(wrap_pyfunction!(link_energy, m)?)?;
    m.add_function(wrap_pyfunction!(solve_optimal_power, m)?)?;
    m.add_function(wrap_pyfunction!(link_distance_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(average_energy, m)?)?;
    m.add_function(wrap_pyfunction!(energy_cost_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(tradeoff_curve, m)?)?;
    m.add_function(wrap_pyfunction!(collaboration_distance_for_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    Ok(())
}
