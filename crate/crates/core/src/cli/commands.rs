//! One function per subcommand: resolved configuration in, files out.

use std::fmt::Debug;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value as Json};
use thiserror::Error;

use super::config::{ConfigError, RunConfig};
use crate::berry::{
    berry_phase_closed, drive_coupling, exact_resonance_frequency, population_trace, resonance_frequency, resonance_shift, DriveComponent,
    ResonanceQuery,
};
use crate::constants::{pa_to_torr, rad_to_hz, BOLTZMANN, GAMMA_ELECTRON};
use crate::langevin_cooling::{
    fit_lorentzian_psd, infer_radius, psd, simulate_com, Axis, Epstein, FeedbackConfig, HarmonicMode, SimOptions, TimeSeries, TranslationalDamping,
};
use crate::nv_model::{pseudo_field, FieldEnvironment, NVConfiguration};
use crate::odmr::{fit_dips, fwhm, linear_grid, resolved_dips, synth_spectrum, tetrahedral_thetas, LineShape, OrientationEnsemble, Spectrum};
use crate::rabi::{predicted_rabi, rabi_factor, simulate_rabi, MicrowavePlane, PulseSequence, RabiGeometry, RabiOptions};
use crate::rotor_thermal::{
    gas_damping_rate, lock_report, max_rotation, rotor_trajectory, threshold_field, BlackBodyModel, DipoleRotor, GasEnvironment, RotatingField,
    RotorState, ThermalModel,
};
use crate::trap::{characterize, pseudopotential_profile, sphere_mass, ChargedParticle, ProfileKind, RingTrapGeometry, TrapDrive};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{kind}: {message}")]
    Physics { kind: String, message: String },
    #[error("Io: {0}")]
    Io(String),
}

impl RunError {
    /// 2 for usage/configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }

    /// One line, `error[<Kind>]: <message>`.
    pub fn line(&self) -> String {
        let kind = match self {
            RunError::Config(c) => c.kind().to_string(),
            RunError::Physics { kind, .. } => kind.clone(),
            RunError::Io(_) => "Io".into(),
        };
        let msg = self.to_string().replace('\n', " ");
        format!("error[{kind}]: {msg}")
    }
}

fn physics<E: Debug + std::fmt::Display>(e: E) -> RunError {
    let dbg = format!("{e:?}");
    let kind = dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string();
    RunError::Physics { kind, message: e.to_string() }
}

fn io(e: impl std::fmt::Display) -> RunError {
    RunError::Io(e.to_string())
}

/// Output files of one run, written under `dir`.
struct Output<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Output<'_> {
    fn csv(&mut self, name: &str, header: &[&str], columns: &[&[f64]]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path).map_err(io)?;
        w.write_record(header).map_err(io)?;
        let n = columns.first().map_or(0, |c| c.len());
        for i in 0..n {
            w.write_record(columns.iter().map(|c| format!("{:e}", c[i]))).map_err(io)?;
        }
        w.flush().map_err(io)?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, cfg: &RunConfig, result: Json) -> Result<(), RunError> {
        let path = self.dir.join(format!("{}.json", cfg.command));
        let doc = json!({ "provenance": cfg.provenance(), "result": result });
        let mut text = serde_json::to_string_pretty(&doc).map_err(io)?;
        text.push('\n');
        fs::write(&path, text).map_err(io)?;
        self.files.push(path);
        Ok(())
    }
}

/// Run `cfg.command`, writing its artifacts into `out_dir`; returns the paths
/// written.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(out_dir).map_err(io)?;
    let mut out = Output { dir: out_dir, files: Vec::new() };
    let result = match cfg.command.as_str() {
        "trap-design" => trap_design(cfg, &mut out)?,
        "odmr-sim" => odmr_sim(cfg, &mut out)?,
        "berry-shift" => berry_shift(cfg, &mut out)?,
        "spin-dynamics" => spin_dynamics(cfg, &mut out)?,
        "rabi-sweep" => rabi_sweep(cfg, &mut out)?,
        "thermal" => thermal(cfg, &mut out)?,
        "rotor" => rotor(cfg, &mut out)?,
        "cooling-sim" => cooling_sim(cfg, &mut out)?,
        "fit-odmr" => fit_odmr(cfg, &mut out)?,
        "fit-psd" => fit_psd(cfg, &mut out)?,
        other => return Err(ConfigError::BadValue { key: "command".into(), reason: format!("unknown command '{other}'") }.into()),
    };
    out.json(cfg, result)?;
    Ok(out.files)
}

fn drive_component(cfg: &RunConfig) -> DriveComponent {
    match cfg.text("drive") {
        "transverse" => DriveComponent::Transverse,
        _ => DriveComponent::Longitudinal,
    }
}

fn target_ms(cfg: &RunConfig) -> i8 {
    if cfg.text("target_ms") == "-1" {
        -1
    } else {
        1
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn trap_design(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let g = RingTrapGeometry::new(cfg.si("ring_inner"), cfg.si("ring_outer")).map_err(physics)?;
    let drive = TrapDrive::new(cfg.si("drive_voltage"), cfg.si("drive_frequency")).map_err(physics)?;
    let p = ChargedParticle::sphere(cfg.si("charges"), cfg.si("radius"), cfg.si("density")).map_err(physics)?;
    let c = characterize(&g, &drive, &p);
    let z = linspace(cfg.si("profile_z_min"), cfg.si("profile_z_max"), cfg.count("profile_points"));
    let full = pseudopotential_profile(&g, &drive, &p, ProfileKind::Full, &z).map_err(physics)?;
    let harmonic = pseudopotential_profile(&g, &drive, &p, ProfileKind::Harmonic, &z).map_err(physics)?;
    out.csv("trap_profile.csv", &["z_m", "full_ev", "harmonic_ev"], &[&z, &full, &harmonic])?;
    Ok(json!({
        "z0_m": c.z0,
        "q_z": c.q_z,
        "omega_z_rad_s": c.omega_z,
        "f_z_hz": rad_to_hz(c.omega_z),
        "depth_ev": c.depth,
        "stable": c.stable,
        "mass_kg": p.mass,
        "charge_c": p.charge,
    }))
}

fn odmr_sim(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let ensemble = OrientationEnsemble::tilted_111(cfg.si("crystal_tilt"));
    let base = NVConfiguration { d: cfg.angular("zero_field"), ..NVConfiguration::with_theta(0.0) };
    let env = FieldEnvironment::static_field(cfg.si("b_static"), cfg.angular("rotation"));
    let line = LineShape { intrinsic_fwhm: cfg.angular("linewidth"), contrast_per_dip: cfg.si("contrast"), strain_e: cfg.angular("strain") };
    let grid = linear_grid(cfg.angular("f_min"), cfg.angular("f_max"), cfg.count("points"));
    let drive = drive_component(cfg);
    let spectrum = synth_spectrum(&ensemble, &line, &base, &env, drive, &grid).map_err(physics)?;
    let path = out.dir.join("odmr_spectrum.csv");
    spectrum.write_csv(fs::File::create(&path).map_err(io)?).map_err(physics)?;
    out.files.push(path);
    let thetas = tetrahedral_thetas(&ensemble);
    let centers = crate::odmr::dip_centers(&thetas, &base, &env, drive, line.strain_e);
    Ok(json!({
        "nv_thetas_deg": thetas.iter().map(|t| t.to_degrees()).collect::<Vec<_>>(),
        "dip_centers_hz": centers.iter().map(|&c| rad_to_hz(c)).collect::<Vec<_>>(),
        "fwhm_hz": fwhm(&spectrum).ok().map(rad_to_hz),
        "resolved_dips_hz": resolved_dips(&spectrum).into_iter().map(rad_to_hz).collect::<Vec<_>>(),
    }))
}

fn berry_shift(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let theta = cfg.si("theta");
    let nv = NVConfiguration { d: cfg.angular("zero_field"), ..NVConfiguration::with_theta(theta) };
    let sign = if cfg.text("sense") == "cw" { -1.0 } else { 1.0 };
    let ms = target_ms(cfg);
    let drive = drive_component(cfg);
    let rates = linspace(cfg.si("rotation_min"), cfg.si("rotation_max"), cfg.count("points"));
    let (mut signed, mut eq, mut shift, mut exact) = (vec![], vec![], vec![], vec![]);
    let mut warnings = Vec::new();
    for &f in &rates {
        let w = sign * 2.0 * std::f64::consts::PI * f;
        let env = FieldEnvironment::static_field(cfg.si("b_static"), w);
        if let Some(msg) = env.adiabatic_warning(&nv) {
            warnings.push(msg);
        }
        let q = ResonanceQuery::new(ms, drive, nv, env).map_err(physics)?;
        signed.push(sign * f);
        eq.push(rad_to_hz(resonance_frequency(&q)));
        shift.push(rad_to_hz(resonance_shift(&q)));
        exact.push(rad_to_hz(exact_resonance_frequency(&q)));
    }
    out.csv("berry_shift.csv", &["rotation_hz", "resonance_hz", "shift_hz", "exact_resonance_hz"], &[&signed, &eq, &shift, &exact])?;
    let top = 2.0 * std::f64::consts::PI * cfg.si("rotation_max");
    Ok(json!({
        "closed_loop_phase_rad": berry_phase_closed(ms, theta).phase,
        "pseudo_field_at_max_t": pseudo_field(top, GAMMA_ELECTRON).map_err(physics)?.magnitude,
        "shift_at_max_hz": shift.last(),
        "warnings": warnings.first().map(|w| vec![w.clone()]).unwrap_or_default(),
    }))
}

fn spin_dynamics(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let nv = NVConfiguration { d: cfg.angular("zero_field"), phi0: cfg.si("phi0"), ..NVConfiguration::with_theta(cfg.si("theta")) };
    let env = FieldEnvironment { mw_amplitude: cfg.si("mw_amplitude"), ..FieldEnvironment::static_field(cfg.si("b_static"), cfg.angular("rotation")) };
    let q = ResonanceQuery::new(target_ms(cfg), drive_component(cfg), nv, env).map_err(physics)?;
    let exact = exact_resonance_frequency(&q);
    let carrier = exact + cfg.angular("mw_detuning");
    let (t, pops) = population_trace(&q, carrier, cfg.si("duration"), cfg.count("samples"), cfg.si("phase_per_step")).map_err(physics)?;
    let col = |i: usize| pops.iter().map(|p| p[i]).collect::<Vec<_>>();
    let (pp, p0, pm) = (col(0), col(1), col(2));
    out.csv("spin_dynamics.csv", &["t_s", "p_plus", "p_zero", "p_minus"], &[&t, &pp, &p0, &pm])?;
    let target = if q.target_ms == 1 { &pp } else { &pm };
    Ok(json!({
        "carrier_hz": rad_to_hz(carrier),
        "exact_resonance_hz": rad_to_hz(exact),
        "closed_form_resonance_hz": rad_to_hz(resonance_frequency(&q)),
        "coupling": drive_coupling(&q),
        "max_target_population": target.iter().copied().fold(0.0, f64::max),
        "warnings": env.adiabatic_warning(&nv).into_iter().collect::<Vec<_>>(),
    }))
}

fn rabi_sweep(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    use std::f64::consts::PI;
    let plane = if cfg.text("plane") == "xz" { MicrowavePlane::Xz } else { MicrowavePlane::Yz };
    let geom = RabiGeometry { theta: cfg.si("theta"), theta_prime: cfg.si("theta_prime"), plane };
    let b_mw = cfg.si("mw_amplitude");
    let n = cfg.count("phi_points");
    let phis: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let rabi_hz: Vec<f64> = phis.iter().map(|&p| rad_to_hz(predicted_rabi(GAMMA_ELECTRON, b_mw, &geom, p))).collect();
    let factor: Vec<f64> = phis.iter().map(|&p| rabi_factor(&geom, p)).collect();
    out.csv("rabi_sweep.csv", &["phi_rad", "rabi_hz", "factor"], &[&phis, &rabi_hz, &factor])?;
    let k_min = (0..n).min_by(|&a, &b| factor[a].total_cmp(&factor[b])).expect("nonempty");
    let mut result = json!({
        "ratio_half_pi_over_pi": rabi_factor(&geom, PI / 2.0) / rabi_factor(&geom, PI),
        "argmin_phi_rad": phis[k_min],
        "min_rabi_hz": rabi_hz[k_min],
        "max_rabi_hz": rabi_hz.iter().copied().fold(0.0, f64::max),
    });
    if cfg.flag("trace") {
        let nv = NVConfiguration::with_theta(geom.theta);
        let f_rot = cfg.si("rotation");
        let env = FieldEnvironment { mw_amplitude: b_mw, ..FieldEnvironment::static_field(cfg.si("b_static"), 2.0 * PI * f_rot) };
        let seq = PulseSequence {
            init_duration: 0.0,
            mw_start_phase: cfg.si("trace_phi"),
            mw_duration: cfg.si("trace_duration"),
            readout_delay: 0.0,
            rotation_period: if f_rot == 0.0 { f64::INFINITY } else { 1.0 / f_rot.abs() },
        };
        let opts = RabiOptions { samples: cfg.count("trace_samples"), ..RabiOptions::new(geom) };
        let trace = simulate_rabi(&nv, &env, &seq, &opts).map_err(physics)?;
        out.csv("rabi_trace.csv", &["t_s", "population"], &[&trace.t, &trace.population])?;
        result["trace"] = json!({
            "fitted_rabi_hz": rad_to_hz(trace.fitted_rabi),
            "predicted_rabi_hz": rad_to_hz(trace.predicted_rabi),
            "fitted_amplitude": trace.fitted_amplitude,
            "norm_drift": trace.norm_drift,
            "warnings": trace.warnings,
        });
    }
    Ok(result)
}

fn thermal(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let r = cfg.si("radius");
    let volume = 4.0 / 3.0 * std::f64::consts::PI * r.powi(3);
    let a_a = (cfg.si("intensity_532") * cfg.si("absorption_532") + cfg.si("intensity_1064") * cfg.si("absorption_1064")) * volume;
    let t0 = cfg.si("t0");
    let bb = BlackBodyModel::calibrate(volume, a_a, cfg.si("plateau_temperature"), t0);
    let model = ThermalModel { a_gas: cfg.si("a_gas"), a_bb: bb.coefficient(), t0 };
    let n = cfg.count("points");
    let (lo, hi) = (cfg.si("p_min").ln(), cfg.si("p_max").ln());
    let pressures: Vec<f64> = linspace(lo, hi, n).into_iter().map(f64::exp).collect();
    let temps = pressures.iter().map(|&p| model.solve(a_a, p)).collect::<Result<Vec<_>, _>>().map_err(physics)?;
    let torr: Vec<f64> = pressures.iter().map(|&p| pa_to_torr(p)).collect();
    out.csv("thermal.csv", &["pressure_pa", "pressure_torr", "temperature_k"], &[&pressures, &torr, &temps])?;
    Ok(json!({
        "absorbed_power_w": a_a,
        "a_gas": model.a_gas,
        "a_bb": model.a_bb,
        "im_clausius_mossotti": bb.im_clausius_mossotti,
        "radiative_dominance_pressure_pa": model.radiative_dominance_pressure(cfg.si("plateau_temperature")),
        "temperature_at_p_max_k": temps.last(),
        "temperature_at_p_min_k": temps.first(),
    }))
}

fn rotor(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let (r, rho) = (cfg.si("radius"), cfg.si("density"));
    let rotor = DipoleRotor::sphere(cfg.si("dipole"), r, rho);
    let particle = ChargedParticle { charge: 0.0, mass: sphere_mass(r, rho), radius: r, density: rho };
    let gas = GasEnvironment::air(cfg.si("pressure"), cfg.si("t0"));
    let gamma_d = gas_damping_rate(&particle, &gas);
    let field = RotatingField { e_xy: cfg.si("e_field"), omega_drive: cfg.angular("drive_frequency") };
    let e_th = threshold_field(&rotor, gamma_d, field.omega_drive);
    let traj = rotor_trajectory(&rotor, &field, gamma_d, RotorState { angle: 0.0, omega: 0.0 }, cfg.si("duration"), cfg.si("dt"), cfg.count("stride"))
        .map_err(physics)?;
    out.csv("rotor.csv", &["t_s", "angle_rad", "omega_rad_s"], &[&traj.t, &traj.angle, &traj.omega])?;
    let lock = lock_report(&traj, &field, 0.25);
    Ok(json!({
        "gamma_d": gamma_d,
        "threshold_field_v_m": e_th,
        "max_rotation_rad_s": max_rotation(&rotor, &field, &particle, &gas).map_err(physics)?,
        "locked": lock.locked,
        "mean_omega_rad_s": lock.mean_omega,
        "mean_beta_rad": lock.mean_beta,
        "predicted_beta_rad": (field.e_xy >= e_th).then(|| (e_th / field.e_xy).asin()),
    }))
}

fn axis_json(mode: &HarmonicMode, series: &TimeSeries, gain: f64, segment: usize, gas: &GasEnvironment, density: f64, out: &mut Output) -> Result<Json, RunError> {
    let variance = series.variance();
    let mut record = json!({
        "omega0_rad_s": mode.omega0,
        "gamma_rad_s": mode.gamma_t,
        "feedback_gain": gain,
        "variance_m2": variance,
        "t_from_variance_k": mode.mass * mode.omega0.powi(2) * variance / BOLTZMANN,
        "t_ideal_feedback_k": mode.bath_t * mode.gamma_t / (mode.gamma_t + gain),
    });
    let est = psd(series, segment).map_err(physics)?;
    out.csv(&format!("psd_{}.csv", mode.axis.name()), &["freq_hz", "psd_m2_per_hz"], &[&est.freq, &est.values])?;
    match fit_lorentzian_psd(&est, mode.mass) {
        Ok(fit) => {
            record["fit"] = serde_json::to_value(fit).map_err(io)?;
            record["inferred_radius_m"] = json!(infer_radius(&fit, gas, density, &Epstein::default()).ok());
        }
        Err(e) => record["fit_error"] = json!(e.to_string()),
    }
    Ok(record)
}

fn cooling_sim(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let seed = cfg.seed.ok_or(ConfigError::MissingKey { key: "seed".into() })?;
    let (r, rho) = (cfg.si("radius"), cfg.si("density"));
    let mass = sphere_mass(r, rho);
    let gas = GasEnvironment::air(cfg.si("pressure"), cfg.si("t0"));
    let gamma = Epstein::default().rate(r, rho, &gas);
    let axes = [(Axis::X, "f_x", "gain_ratio_x"), (Axis::Y, "f_y", "gain_ratio_y"), (Axis::Z, "f_z", "gain_ratio_z")];
    let modes: Vec<HarmonicMode> =
        axes.iter().map(|&(axis, f, _)| HarmonicMode { axis, omega0: cfg.angular(f), mass, gamma_t: gamma, bath_t: gas.t0 }).collect();
    let gains = [cfg.si("gain_ratio_x") * gamma, cfg.si("gain_ratio_y") * gamma, cfg.si("gain_ratio_z") * gamma];
    let feedback = match cfg.text("feedback") {
        "ideal" => Some(FeedbackConfig::ideal(gains)),
        "delayed" => Some(FeedbackConfig::delayed(gains)),
        _ => None,
    };
    let w_max = modes.iter().map(|m| m.omega0).fold(0.0, f64::max);
    let dt = 2.0 * std::f64::consts::PI / w_max / cfg.count("steps_per_period") as f64;
    let opts = SimOptions {
        noise_std: cfg.si("noise_floor"),
        record_every: cfg.count("record_every"),
        ..SimOptions::new(cfg.si("damping_times") * 2.0 / gamma, dt, seed)
    };
    let series = simulate_com(&modes, feedback.as_ref(), &opts).map_err(physics)?;
    let mut per_axis = serde_json::Map::new();
    for ((mode, s), &g) in modes.iter().zip(&series).zip(&gains) {
        if cfg.flag("write_series") {
            let t: Vec<f64> = (0..s.samples.len()).map(|k| k as f64 * s.dt).collect();
            out.csv(&format!("series_{}.csv", mode.axis.name()), &["t_s", "x_m"], &[&t, &s.samples])?;
        }
        let applied = if feedback.is_some() { g } else { 0.0 };
        per_axis.insert(mode.axis.name().into(), axis_json(mode, s, applied, cfg.count("segment_length"), &gas, rho, out)?);
    }
    Ok(json!({ "mass_kg": mass, "gas_damping_rad_s": gamma, "dt_s": dt, "sample_dt_s": series[0].dt, "axes": per_axis }))
}

fn fit_odmr(cfg: &RunConfig, _out: &mut Output) -> Result<Json, RunError> {
    let spectrum = Spectrum::from_csv_path(Path::new(cfg.text("input"))).map_err(physics)?;
    let fit = fit_dips(&spectrum, cfg.count("dips"), None).map_err(physics)?;
    let mut result = fit.to_json_records();
    result["iterations"] = json!(fit.cost_history.len());
    Ok(result)
}

fn read_series(path: &Path) -> Result<TimeSeries, RunError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(io)?;
    let (mut t, mut x) = (Vec::new(), Vec::new());
    for rec in rdr.deserialize::<(f64, f64)>() {
        let (a, b) = rec.map_err(io)?;
        t.push(a);
        x.push(b);
    }
    if t.len() < 2 {
        return Err(RunError::Physics { kind: "TooFewSamples".into(), message: format!("{} has fewer than two rows", path.display()) });
    }
    Ok(TimeSeries { axis: Axis::Z, dt: t[1] - t[0], samples: x, seed: 0 })
}

fn fit_psd(cfg: &RunConfig, out: &mut Output) -> Result<Json, RunError> {
    let series = read_series(Path::new(cfg.text("input")))?;
    let (r, rho) = (cfg.si("radius"), cfg.si("density"));
    let mass = sphere_mass(r, rho);
    let gas = GasEnvironment::air(cfg.si("pressure"), cfg.si("t0"));
    let est = psd(&series, cfg.count("segment_length")).map_err(physics)?;
    out.csv("psd.csv", &["freq_hz", "psd_m2_per_hz"], &[&est.freq, &est.values])?;
    let fit = fit_lorentzian_psd(&est, mass).map_err(physics)?;
    let radius = infer_radius(&fit, &gas, rho, &Epstein::default()).map_err(physics)?;
    Ok(json!({
        "fit": fit,
        "inferred_radius_m": radius,
        "segments": est.segments,
    }))
}
