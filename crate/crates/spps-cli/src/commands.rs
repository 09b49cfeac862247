//! Command execution: turns a typed configuration into library calls and
//! writes the results.
//!
//! Output conventions, shared by stdout and CSV files:
//! - every float is printed with `{:.14e}` (15 significant digits), so runs
//!   are reproducible byte for byte;
//! - complex values occupy two columns `<name>_re,<name>_im`;
//! - CSV files use `,` separators, `.` decimal points, a header line, and
//!   LF line endings.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use spps_core::formal_powers::{
    build_nonvanishing_solution_with_derivative, build_powers_with_derivative, PICARD_MAX_ITER,
    PICARD_TOL,
};
use spps_core::spectral::{
    build_family_for, char_polynomial, find_roots, solve_well, Convention as CoreConvention,
    RootRegion, SLProblemSpec, WellSpec,
};
use spps_core::transmutation::{
    apply_kernel, goursat_kernel, kernel_constant_q, reparametrize_h, ApplyMode, Kernel2D,
};
use spps_core::{
    darboux::{darboux_chain, darboux_kernel},
    dirac::{dirac_solve, DiracSpec},
    grid::GridFn,
    GridFn64, Kernel2D64, SLProblemSpec64,
};

use crate::config::{
    CharMapConfig, CommandConfig, Convention, DiracConfig, ExprVal, Family, KernelApplyConfig,
    KernelChainConfig, KernelConstantConfig, KernelDarbouxConfig, KernelGoursatConfig,
    KernelReparamConfig, PowersConfig, Region, SolveSlConfig, SolveWellConfig,
};

/// Failure modes, split by exit code: configuration and I/O problems exit
/// with 2, numerical non-convergence with 3.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<spps_core::Error> for CliError {
    fn from(e: spps_core::Error) -> Self {
        match e {
            spps_core::Error::Convergence(_) | spps_core::Error::SingularSolution(_) => {
                CliError::Numerical(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn config_err<T>(message: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(message.into()))
}

/// 15-significant-digit float form used for all numeric output.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.14e}")
}

fn sample(e: &ExprVal, what: &str, a: f64, b: f64, m: usize) -> Result<GridFn64, CliError> {
    GridFn::from_fn(a, b, m, |x| Complex64::new(e.eval(x), 0.0))
        .map_err(|err| CliError::Config(format!("{what} `{}`: {err}", e.text)))
}

fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|err| CliError::Config(format!("cannot write `{path}`: {err}")))
}

fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|err| CliError::Config(format!("cannot read `{path}`: {err}")))
}

fn out_line(stdout: &mut dyn Write, line: &str) -> Result<(), CliError> {
    writeln!(stdout, "{line}").map_err(|err| CliError::Config(format!("stdout: {err}")))
}

pub fn run(cfg: &CommandConfig, threads: usize, stdout: &mut dyn Write) -> Result<(), CliError> {
    if threads == 0 {
        return config_err("--threads must be at least 1");
    }
    match cfg {
        CommandConfig::SolveSl(c) => run_solve_sl(c, stdout),
        CommandConfig::SolveWell(c) => run_solve_well(c, stdout),
        CommandConfig::CharMap(c) => run_char_map(c, threads),
        CommandConfig::Powers(c) => run_powers(c),
        CommandConfig::KernelConstant(c) => run_kernel_constant(c),
        CommandConfig::KernelGoursat(c) => run_kernel_goursat(c),
        CommandConfig::KernelReparam(c) => run_kernel_reparam(c),
        CommandConfig::KernelDarboux(c) => run_kernel_darboux(c),
        CommandConfig::KernelChain(c) => run_kernel_chain(c),
        CommandConfig::KernelApply(c) => run_kernel_apply(c),
        CommandConfig::Dirac(c) => run_dirac(c),
    }
}

fn sl_spec(p: &crate::config::ProblemConfig) -> Result<SLProblemSpec64, CliError> {
    let q = sample(&p.potential, "potential", p.a, p.b, p.m)?;
    let mut spec = SLProblemSpec::dirichlet(q, p.n);
    spec.alpha = p.alpha;
    spec.beta1 = p.beta1;
    spec.beta2 = p.beta2;
    spec.beta1p = p.beta1p;
    spec.beta2p = p.beta2p;
    spec.phi_poly = p.phi.clone();
    spec.lambda0 = p.lambda0;
    spec.convention = match p.convention {
        Convention::Direct => CoreConvention::Direct,
        Convention::Schrodinger => CoreConvention::Schrodinger,
    };
    Ok(spec)
}

fn checked_region(r: &Region) -> Result<RootRegion<f64>, CliError> {
    if !(r.re_min <= r.re_max && r.im_min <= r.im_max) {
        return config_err(format!(
            "empty search region [{}, {}] x [{}, {}]",
            r.re_min, r.re_max, r.im_min, r.im_max
        ));
    }
    Ok(RootRegion::Rect {
        re_lo: r.re_min,
        re_hi: r.re_max,
        im_lo: r.im_min,
        im_hi: r.im_max,
    })
}

fn eigenvalue_csv(roots: &[Complex64]) -> String {
    let mut s = String::from("re,im\n");
    for z in roots {
        s.push_str(&format!("{},{}\n", fmt_f(z.re), fmt_f(z.im)));
    }
    s
}

fn run_solve_sl(c: &SolveSlConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = sl_spec(&c.problem)?;
    let fam = build_family_for(&spec)?;
    let p = char_polynomial(&spec, &fam)?;
    let region = checked_region(&c.region)?;
    let found = find_roots(&p, &region)?;
    if found.trust_warning {
        eprintln!(
            "warning: the search region reaches beyond the series trust radius; \
             distant eigenvalues may be inaccurate"
        );
    }
    for z in &found.roots {
        out_line(stdout, &format!("{} {}", fmt_f(z.re), fmt_f(z.im)))?;
    }
    if let Some(path) = &c.out {
        write_file(path, &eigenvalue_csv(&found.roots))?;
    }
    Ok(())
}

fn run_solve_well(c: &SolveWellConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    if !(c.width > 0.0) {
        return config_err(format!("width {} must be positive", c.width));
    }
    let q = sample(&c.potential, "potential", 0.0, c.width, c.m)?;
    let spec = WellSpec {
        q,
        alpha1: c.alpha1,
        alpha2: c.alpha2,
        n: c.n,
    };
    let levels = solve_well(&spec)?;
    for l in &levels {
        out_line(stdout, &format!("{} {}", fmt_f(*l), fmt_f(0.0)))?;
    }
    if let Some(path) = &c.out {
        let roots: Vec<Complex64> = levels.iter().map(|l| Complex64::new(*l, 0.0)).collect();
        write_file(path, &eigenvalue_csv(&roots))?;
    }
    Ok(())
}

fn run_char_map(c: &CharMapConfig, threads: usize) -> Result<(), CliError> {
    if c.nx < 2 || c.ny < 2 {
        return config_err(format!("grid {}x{} needs at least 2 points per axis", c.nx, c.ny));
    }
    checked_region(&c.region)?;
    let spec = sl_spec(&c.problem)?;
    let fam = build_family_for(&spec)?;
    let p = char_polynomial(&spec, &fam)?;

    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let re_axis = axis(c.region.re_min, c.region.re_max, c.nx);
    let im_axis = axis(c.region.im_min, c.region.im_max, c.ny);

    // Each point is evaluated independently, so splitting the rows across
    // threads cannot change any output byte, only the wall time.
    let mut rows = vec![vec![0.0f64; c.ny]; c.nx];
    let threads = threads.min(c.nx).max(1);
    let chunk = c.nx.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, slice) in rows.chunks_mut(chunk).enumerate() {
            let (p, re_axis, im_axis) = (&p, &re_axis, &im_axis);
            scope.spawn(move || {
                for (i, row) in slice.iter_mut().enumerate() {
                    let re = re_axis[t * chunk + i];
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = p.eval(Complex64::new(re, im_axis[j])).norm();
                    }
                }
            });
        }
    });

    let mut s = String::from("re\\im");
    for im in &im_axis {
        s.push(',');
        s.push_str(&fmt_f(*im));
    }
    s.push('\n');
    for (i, row) in rows.iter().enumerate() {
        s.push_str(&fmt_f(re_axis[i]));
        for v in row {
            s.push(',');
            s.push_str(&fmt_f(*v));
        }
        s.push('\n');
    }
    write_file(&c.out, &s)
}

fn run_powers(c: &PowersConfig) -> Result<(), CliError> {
    let q = sample(&c.potential, "potential", c.a, c.b, c.m)?;
    let x0 = c.x0.unwrap_or(c.a);
    if !(c.a..=c.b).contains(&x0) {
        return config_err(format!("x0 = {x0} lies outside [{}, {}]", c.a, c.b));
    }
    let i0 = q.nearest_node(x0);
    let (f, df) = build_nonvanishing_solution_with_derivative(&q, i0, PICARD_TOL, PICARD_MAX_ITER)?;
    let fam = build_powers_with_derivative(&f, &df, i0, c.order)?;

    let (tag, columns): (&str, Vec<GridFn64>) = match c.family {
        Family::Phi => ("phi", (0..=c.order).map(|k| fam.phi(k)).collect()),
        Family::Psi => ("psi", (0..=c.order).map(|k| fam.psi(k)).collect()),
    };

    let mut s = String::from("x,f_re,f_im");
    for k in 0..=c.order {
        s.push_str(&format!(",{tag}{k}_re,{tag}{k}_im"));
    }
    s.push('\n');
    for i in 0..f.values().len() {
        s.push_str(&fmt_f(f.x(i)));
        let fv = f.values()[i];
        s.push_str(&format!(",{},{}", fmt_f(fv.re), fmt_f(fv.im)));
        for col in &columns {
            let v = col.values()[i];
            s.push_str(&format!(",{},{}", fmt_f(v.re), fmt_f(v.im)));
        }
        s.push('\n');
    }
    write_file(&c.out, &s)
}

/// Kernel file layout: a two-line preamble (`a,nodes,h_re,h_im` header and
/// its values) followed by `nodes` rows of `2*nodes` columns holding the
/// kernel values interleaved `re,im` along the second axis.
fn kernel_csv(k: &Kernel2D64) -> String {
    let n = k.nodes();
    let mut s = String::from("a,nodes,h_re,h_im\n");
    s.push_str(&format!(
        "{},{n},{},{}\n",
        fmt_f(k.half_width()),
        fmt_f(k.h().re),
        fmt_f(k.h().im)
    ));
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                s.push(',');
            }
            let v = k.value(i, j);
            s.push_str(&format!("{},{}", fmt_f(v.re), fmt_f(v.im)));
        }
        s.push('\n');
    }
    s
}

fn read_kernel_csv(path: &str) -> Result<Kernel2D64, CliError> {
    let text = read_file(path)?;
    let bad = |msg: String| CliError::Config(format!("`{path}` is not a kernel file: {msg}"));
    let mut lines = text.lines();
    match lines.next() {
        Some("a,nodes,h_re,h_im") => {}
        _ => return Err(bad("missing `a,nodes,h_re,h_im` header".into())),
    }
    let meta: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("missing parameter line".into()))?
        .split(',')
        .collect();
    if meta.len() != 4 {
        return Err(bad(format!("expected 4 parameters, got {}", meta.len())));
    }
    let parse = |s: &str| -> Result<f64, CliError> {
        s.parse::<f64>()
            .map_err(|_| bad(format!("bad number `{s}`")))
    };
    let a = parse(meta[0])?;
    let nodes: usize = meta[1]
        .parse()
        .map_err(|_| bad(format!("bad node count `{}`", meta[1])))?;
    let h = Complex64::new(parse(meta[2])?, parse(meta[3])?);
    let mut values = Vec::with_capacity(nodes * nodes);
    for i in 0..nodes {
        let row = lines
            .next()
            .ok_or_else(|| bad(format!("missing data row {i}")))?;
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 2 * nodes {
            return Err(bad(format!(
                "row {i} has {} fields, expected {}",
                fields.len(),
                2 * nodes
            )));
        }
        for pair in fields.chunks(2) {
            values.push(Complex64::new(parse(pair[0])?, parse(pair[1])?));
        }
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(bad("trailing content after the data rows".into()));
    }
    Kernel2D::new(a, h, nodes, values).map_err(CliError::from)
}

fn run_kernel_constant(c: &KernelConstantConfig) -> Result<(), CliError> {
    let k = kernel_constant_q(c.c, c.h, c.a, c.nodes)?;
    write_file(&c.out, &kernel_csv(&k))
}

fn run_kernel_goursat(c: &KernelGoursatConfig) -> Result<(), CliError> {
    if c.nodes < 5 {
        return config_err(format!("nodes = {} is too coarse for a kernel", c.nodes));
    }
    let m = c.m.unwrap_or(c.nodes - 1);
    let q = sample(&c.potential, "potential", -c.a, c.a, m)?;
    let k = goursat_kernel(&q, c.h, c.nodes, c.tol)?;
    write_file(&c.out, &kernel_csv(&k))
}

fn run_kernel_reparam(c: &KernelReparamConfig) -> Result<(), CliError> {
    let k = read_kernel_csv(&c.input)?;
    let out = reparametrize_h(&k, c.h)?;
    write_file(&c.out, &kernel_csv(&out))
}

fn run_kernel_darboux(c: &KernelDarbouxConfig) -> Result<(), CliError> {
    let k1 = read_kernel_csv(&c.input)?;
    let (a, n) = (k1.half_width(), k1.nodes());
    let f = sample(&c.f, "f", -a, a, n - 1)?;
    // The construction needs f(0) = 1; accept any nonvanishing scaling of
    // the same solution and normalize by the center sample.
    let center = f.values()[(n - 1) / 2];
    if center.norm() < 1e-12 {
        return config_err(format!("f `{}` vanishes at the center node", c.f.text));
    }
    let f = f.map(|v| v / center);
    let k2 = darboux_kernel(&k1, &f)?;
    write_file(&c.out, &kernel_csv(&k2))
}

fn run_kernel_chain(c: &KernelChainConfig) -> Result<(), CliError> {
    let rungs = darboux_chain(c.steps, c.a, c.nodes)?;
    for (i, k) in rungs.iter().enumerate() {
        write_file(&format!("{}_{i}.csv", c.out), &kernel_csv(k))?;
    }
    Ok(())
}

fn run_kernel_apply(c: &KernelApplyConfig) -> Result<(), CliError> {
    let k = read_kernel_csv(&c.input)?;
    let (a, n) = (k.half_width(), k.nodes());
    let u = sample(&c.u, "u", -a, a, n - 1)?;
    let tu = apply_kernel(&k, &u, ApplyMode::Full)?;
    let mut s = String::from("x,u_re,u_im,tu_re,tu_im\n");
    for i in 0..u.values().len() {
        let (uv, tv) = (u.values()[i], tu.values()[i]);
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f(u.x(i)),
            fmt_f(uv.re),
            fmt_f(uv.im),
            fmt_f(tv.re),
            fmt_f(tv.im)
        ));
    }
    write_file(&c.out, &s)
}

fn run_dirac(c: &DiracConfig) -> Result<(), CliError> {
    let s_grid = sample(&c.s, "s", c.a, c.b, c.m)?;
    let spec = DiracSpec {
        m: c.mass,
        s: s_grid,
        e: c.e,
        c1: c.c1,
        c2: c.c2,
    };
    let (psi1, psi2) = dirac_solve(&spec, c.n)?;
    let mut s = String::from("x,psi1_re,psi1_im,psi2_re,psi2_im\n");
    for i in 0..psi1.values().len() {
        let (v1, v2) = (psi1.values()[i], psi2.values()[i]);
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f(psi1.x(i)),
            fmt_f(v1.re),
            fmt_f(v1.im),
            fmt_f(v2.re),
            fmt_f(v2.im)
        ));
    }
    write_file(&c.out, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    fn load(section: &str, text: &str) -> CommandConfig {
        CommandConfig::load(section, text, &Overrides::default()).unwrap()
    }

    #[test]
    fn float_format_has_fifteen_significant_digits() {
        assert_eq!(fmt_f(1.0), "1.00000000000000e0");
        assert_eq!(fmt_f(-9.000000337), "-9.00000033700000e0");
        assert_eq!(fmt_f(0.0), "0.00000000000000e0");
        assert_eq!(fmt_f(100.02), "1.00020000000000e2");
    }

    #[test]
    fn kernel_csv_round_trips_through_a_file() {
        let k = kernel_constant_q(
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.5, 0.25),
            2.0,
            21,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        let path = path.to_str().unwrap();
        write_file(path, &kernel_csv(&k)).unwrap();
        let back = read_kernel_csv(path).unwrap();
        assert_eq!(back.nodes(), 21);
        assert_eq!(back.h(), k.h());
        for i in 0..21 {
            for j in 0..21 {
                let d = (back.value(i, j) - k.value(i, j)).norm();
                assert!(d <= 1e-14 * (1.0 + k.value(i, j).norm()), "({i},{j})");
            }
        }
    }

    #[test]
    fn kernel_reader_rejects_mangled_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        let path = path.to_str().unwrap();

        write_file(path, "nonsense\n").unwrap();
        assert!(read_kernel_csv(path).is_err());

        write_file(path, "a,nodes,h_re,h_im\n1.0,5,0.0,0.0\n1,2,3\n").unwrap();
        let e = read_kernel_csv(path).unwrap_err();
        assert!(e.to_string().contains("row 0"), "{e}");
    }

    #[test]
    fn char_map_output_is_identical_across_thread_counts() {
        let text = "[char-map]\na = 0\nb = 3.141592653589793\nm = 200\npotential = 0\nn = 12\n\
                    re-min = 0\nre-max = 6\nim-min = -1\nim-max = 1\nnx = 13\nny = 5\nout = PATH\n";
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = Vec::new();
        for threads in [1usize, 4] {
            let path = dir.path().join(format!("map{threads}.csv"));
            let cfg = load(
                "char-map",
                &text.replace("PATH", path.to_str().unwrap()),
            );
            run(&cfg, threads, &mut Vec::new()).unwrap();
            bytes.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(bytes[0], bytes[1]);
        let body = String::from_utf8(bytes[0].clone()).unwrap();
        assert_eq!(body.lines().count(), 14); // axis header + one row per re value
        assert!(body.starts_with("re\\im,"));
    }

    #[test]
    fn solve_sl_prints_one_eigenvalue_per_line() {
        let text = "[solve-sl]\na = 0\nb = 3.141592653589793\nm = 400\npotential = 0\nn = 60\n\
                    convention = schrodinger\nre-min = 0.5\nre-max = 10\nim-min = -0.5\nim-max = 0.5\n";
        let cfg = load("solve-sl", text);
        let mut buf = Vec::new();
        run(&cfg, 1, &mut buf).unwrap();
        let out = String::from_utf8(buf).unwrap();
        let lambdas: Vec<f64> = out
            .lines()
            .map(|l| l.split(' ').next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(lambdas.len(), 3); // 1, 4, 9 for the free string
        assert!((lambdas[0] - 1.0).abs() < 1e-8);
        assert!((lambdas[1] - 4.0).abs() < 1e-7);
        assert!((lambdas[2] - 9.0).abs() < 1e-5);
        for line in out.lines() {
            let im: f64 = line.split(' ').nth(1).unwrap().parse().unwrap();
            assert!(im.abs() < 1e-8, "{line}");
        }
    }

    #[test]
    fn apply_round_trip_matches_direct_application() {
        // constant kernel: build, write, read back, apply; the operator obeys
        // T[cos(w x)] structure tested in the core crate, here just check
        // the file pipeline produces the same values as the direct call.
        let dir = tempfile::tempdir().unwrap();
        let kpath = dir.path().join("k.csv");
        let opath = dir.path().join("t.csv");
        let k = kernel_constant_q(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0), 1.0, 41)
            .unwrap();
        write_file(kpath.to_str().unwrap(), &kernel_csv(&k)).unwrap();
        let text = format!(
            "[kernel-apply]\ninput = {}\nu = cos(x/2)\nout = {}\n",
            kpath.display(),
            opath.display()
        );
        let cfg = load("kernel-apply", &text);
        run(&cfg, 1, &mut Vec::new()).unwrap();

        let u = GridFn::from_fn(-1.0, 1.0, 40, |x: f64| Complex64::new((x / 2.0).cos(), 0.0))
            .unwrap();
        let want = apply_kernel(&k, &u, ApplyMode::Full).unwrap();
        let body = std::fs::read_to_string(&opath).unwrap();
        let rows: Vec<&str> = body.lines().skip(1).collect();
        assert_eq!(rows.len(), 41);
        for (i, row) in rows.iter().enumerate() {
            let cols: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            assert!((cols[3] - want.values()[i].re).abs() < 1e-12, "row {i}");
        }
    }

    #[test]
    fn errors_pick_their_exit_class() {
        // unreadable input file -> config class
        let e = read_kernel_csv("/nonexistent/k.csv").unwrap_err();
        assert!(matches!(e, CliError::Config(_)));

        // absurd tolerance -> convergence failure -> numerical class
        let text = "[kernel-goursat]\na = 0.9\nnodes = 41\npotential = 2/(x+1)^2\nh = -1 0\n\
                    tol = 1e-30\nout = nowhere.csv\n";
        let cfg = load("kernel-goursat", text);
        let e = run(&cfg, 1, &mut Vec::new()).unwrap_err();
        assert!(matches!(e, CliError::Numerical(_)), "{e}");
    }
}
