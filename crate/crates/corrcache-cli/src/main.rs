//! Command-line front end for the correlated-files caching library.
//!
//! Subcommands: `bound` prints converse corner points and their convex
//! envelope, `achieve` builds the aligned delivery for one demand,
//! `verify` decodes a delivery with the GF(2) oracle, `sweep` checks a
//! whole parameter grid, `multireq` replays the bundled multi-request
//! codes, and `curve` emits a plot-ready memory-load CSV.
//!
//! Reports go to stdout (or `-o FILE`) and are byte-identical across
//! runs. Exit codes: 0 success, 1 I/O error, 2 bad arguments, 3 model
//! violation, 4 verification failure.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corrcache::bounds::{
    baseline_round_division_load, converse_envelope_average, converse_envelope_type,
    corner_memory, load_coefficient, Envelope,
};
use corrcache::model::{Demand, Leaders, ProblemInstance};
use corrcache::multireq::{case, verify_case, CaseId};
use corrcache::placement::man_placement;
use corrcache::rational::{display, parse_rational, to_f64};
use corrcache::scheme::{build_delivery, Transmission};
use corrcache::verify::{cell_optimality_proven, decode_check, measured_load, sweep_verify};
use corrcache::Rat;
use serde::Serialize;

const EXIT_OK: u8 = 0;
const EXIT_IO: u8 = 1;
const EXIT_MODEL: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(
    name = "corrcache",
    version,
    about = "Coded caching over shared file blocks: bounds, deliveries, exact verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print converse corner points and their lower convex envelope
    Bound(BoundCmd),
    /// Build the aligned delivery for one demand and print it as JSON
    Achieve(AchieveCmd),
    /// Build a delivery, decode it with the GF(2) oracle, report per user
    Verify(VerifyCmd),
    /// Verify every demand at every corner of a parameter grid
    Sweep(SweepCmd),
    /// Replay and decode the bundled multi-request broadcast codes
    Multireq(MultireqCmd),
    /// Emit a memory-load curve (converse, scheme, baseline) as CSV
    Curve(CurveCmd),
}

#[derive(Args)]
struct InstanceArgs {
    /// Number of library files
    #[arg(short = 'N', long = "files")]
    n_files: u32,
    /// Number of cache-equipped users
    #[arg(short = 'K', long = "users")]
    n_users: u32,
    /// Number of files sharing each library block
    #[arg(short = 'r', long = "overlap")]
    overlap: u32,
}

#[derive(Args)]
struct MemoryArg {
    /// Cache size in file units, an exact rational like 3/5 (floats rejected)
    #[arg(short = 'M', long = "memory", value_parser = parse_rational)]
    memory: Rat,
}

#[derive(Args)]
struct DemandArgs {
    /// Demanded file per user, comma separated, e.g. 1,2,3,1,2
    #[arg(short = 'd', long = "demand", value_delimiter = ',', required = true)]
    demand: Vec<u32>,
    /// Leader users in serving order, comma separated (default: first
    /// requesting user of each distinct file)
    #[arg(long = "leaders", value_delimiter = ',')]
    leaders: Option<Vec<u32>>,
}

#[derive(Args)]
struct OutputArg {
    /// Write the report here instead of stdout
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BoundCmd {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Bound demands with this many distinct files (default: min(N, K))
    #[arg(short = 's', long = "type", conflicts_with = "average")]
    type_s: Option<u32>,
    /// Bound the average over all demand vectors instead
    #[arg(long)]
    average: bool,
    /// Also evaluate the envelope at this memory, e.g. 3/5
    #[arg(long = "at", value_parser = parse_rational)]
    at: Option<Rat>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct AchieveCmd {
    #[command(flatten)]
    inst: InstanceArgs,
    #[command(flatten)]
    mem: MemoryArg,
    #[command(flatten)]
    dem: DemandArgs,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct VerifyCmd {
    #[command(flatten)]
    inst: InstanceArgs,
    #[command(flatten)]
    mem: MemoryArg,
    #[command(flatten)]
    dem: DemandArgs,
    /// Drop this many trailing combinations before decoding, to simulate
    /// an incomplete broadcast
    #[arg(long = "drop-last", default_value_t = 0)]
    drop_last: usize,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct SweepCmd {
    /// Largest file count in the grid
    #[arg(short = 'N', long = "max-files")]
    max_files: u32,
    /// Largest user count in the grid
    #[arg(short = 'K', long = "max-users")]
    max_users: u32,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct MultireqCmd {
    /// Check one pattern instead of all: triangle, disjoint-pair, star,
    /// repeated-pair
    #[arg(long = "case", value_parser = parse_case)]
    case: Option<CaseId>,
    #[command(flatten)]
    out: OutputArg,
}

#[derive(Args)]
struct CurveCmd {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Demand type for the worst-case rows (default: min(N, K))
    #[arg(short = 's', long = "type")]
    type_s: Option<u32>,
    /// Append rows for the demand-averaged converse
    #[arg(long)]
    average: bool,
    #[command(flatten)]
    out: OutputArg,
}

fn parse_case(s: &str) -> Result<CaseId, String> {
    CaseId::from_slug(s).ok_or_else(|| {
        format!("unknown case '{s}' (expected triangle, disjoint-pair, star or repeated-pair)")
    })
}

enum AppError {
    Model(corrcache::Error),
    Io(std::io::Error),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Model(_) => EXIT_MODEL,
            AppError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Model(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<corrcache::Error> for AppError {
    fn from(e: corrcache::Error) -> Self {
        AppError::Model(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<u8, AppError> {
    match command {
        Command::Bound(cmd) => run_bound(cmd),
        Command::Achieve(cmd) => run_achieve(cmd),
        Command::Verify(cmd) => run_verify(cmd),
        Command::Sweep(cmd) => run_sweep(cmd),
        Command::Multireq(cmd) => run_multireq(cmd),
        Command::Curve(cmd) => run_curve(cmd),
    }
}

fn emit(out: &OutputArg, content: &str) -> Result<(), AppError> {
    match &out.output {
        Some(path) => fs::write(path, content)?,
        None => std::io::stdout().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn json_doc<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn make_leaders(demand: &Demand, users: &Option<Vec<u32>>) -> Result<Leaders, corrcache::Error> {
    match users {
        Some(u) => Leaders::explicit(demand, u.clone()),
        None => Ok(Leaders::first_occurrence(demand)),
    }
}

#[derive(Serialize)]
struct PointOut {
    t: u32,
    memory: String,
    load: String,
    memory_float: f64,
    load_float: f64,
    on_hull: bool,
}

#[derive(Serialize)]
struct EvalOut {
    memory: String,
    load: String,
    memory_float: f64,
    load_float: f64,
}

#[derive(Serialize)]
struct BoundOut {
    n_files: u32,
    n_users: u32,
    overlap: u32,
    bound: String,
    points: Vec<PointOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    value_at: Option<EvalOut>,
}

fn envelope_points(env: &Envelope) -> Vec<PointOut> {
    env.points
        .iter()
        .map(|p| PointOut {
            t: p.multiplicity,
            memory: display(&p.memory),
            load: display(&p.load),
            memory_float: to_f64(&p.memory),
            load_float: to_f64(&p.load),
            on_hull: env.hull.iter().any(|h| h.multiplicity == p.multiplicity),
        })
        .collect()
}

fn run_bound(cmd: BoundCmd) -> Result<u8, AppError> {
    let (n, k, r) = (cmd.inst.n_files, cmd.inst.n_users, cmd.inst.overlap);
    let (env, label) = if cmd.average {
        (converse_envelope_average(n, k, r)?, "average".to_string())
    } else {
        let s = cmd.type_s.unwrap_or_else(|| n.min(k));
        (converse_envelope_type(n, k, r, s)?, format!("type-{s}"))
    };
    let value_at = match &cmd.at {
        Some(m) => {
            let load = env.eval(m)?;
            Some(EvalOut {
                memory: display(m),
                load: display(&load),
                memory_float: to_f64(m),
                load_float: to_f64(&load),
            })
        }
        None => None,
    };
    let report = BoundOut {
        n_files: n,
        n_users: k,
        overlap: r,
        bound: label,
        points: envelope_points(&env),
        value_at,
    };
    emit(&cmd.out, &json_doc(&report))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AchieveOut {
    n_files: u32,
    n_users: u32,
    memory: String,
    overlap: u32,
    multiplicity: u32,
    demand: Vec<u32>,
    leaders: Vec<u32>,
    combination_count: usize,
    load: String,
    load_float: f64,
    transmission: Transmission,
}

fn run_achieve(cmd: AchieveCmd) -> Result<u8, AppError> {
    let inst = ProblemInstance::new(
        cmd.inst.n_files,
        cmd.inst.n_users,
        cmd.mem.memory.clone(),
        cmd.inst.overlap,
    )?;
    let demand = Demand::new(&inst, cmd.dem.demand.clone())?;
    let leaders = make_leaders(&demand, &cmd.dem.leaders)?;
    let tx = build_delivery(&inst, &demand, &leaders)?;
    let load = measured_load(&inst, &tx)?;
    let report = AchieveOut {
        n_files: inst.n_files(),
        n_users: inst.n_users(),
        memory: display(inst.memory()),
        overlap: inst.overlap(),
        multiplicity: inst.integral_multiplicity()?,
        demand: demand.entries().to_vec(),
        leaders: leaders.users().to_vec(),
        combination_count: tx.combination_count(),
        load: display(&load),
        load_float: to_f64(&load),
        transmission: tx,
    };
    emit(&cmd.out, &json_doc(&report))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct UserOut {
    user: u32,
    file: u32,
    desired: usize,
    recovered: usize,
    missing: Vec<String>,
}

#[derive(Serialize)]
struct VerifyOut {
    n_files: u32,
    n_users: u32,
    memory: String,
    overlap: u32,
    multiplicity: u32,
    demand: Vec<u32>,
    leaders: Vec<u32>,
    combination_count: usize,
    dropped_combinations: usize,
    load: String,
    load_float: f64,
    expected_load: String,
    load_matches: bool,
    all_decoded: bool,
    users: Vec<UserOut>,
}

fn drop_last_combinations(tx: Transmission, mut count: usize) -> Transmission {
    let mut groups = tx.groups().to_vec();
    while count > 0 {
        let Some(last) = groups.last_mut() else { break };
        if last.rows.len() <= count {
            count -= last.rows.len();
            groups.pop();
        } else {
            let keep = last.rows.len() - count;
            last.rows.truncate(keep);
            count = 0;
        }
    }
    Transmission::from_groups(groups)
}

fn run_verify(cmd: VerifyCmd) -> Result<u8, AppError> {
    let inst = ProblemInstance::new(
        cmd.inst.n_files,
        cmd.inst.n_users,
        cmd.mem.memory.clone(),
        cmd.inst.overlap,
    )?;
    let demand = Demand::new(&inst, cmd.dem.demand.clone())?;
    let leaders = make_leaders(&demand, &cmd.dem.leaders)?;
    let placement = man_placement(&inst)?;
    let full = build_delivery(&inst, &demand, &leaders)?;
    let tx = drop_last_combinations(full, cmd.drop_last);
    let decode = decode_check(&inst, &placement, &demand, &tx)?;
    let load = measured_load(&inst, &tx)?;
    let expected = load_coefficient(
        inst.n_files(),
        inst.n_users(),
        inst.overlap(),
        inst.integral_multiplicity()?,
        demand.distinct_count() as u32,
    )?;
    let all_decoded = decode.all_decoded();
    let report = VerifyOut {
        n_files: inst.n_files(),
        n_users: inst.n_users(),
        memory: display(inst.memory()),
        overlap: inst.overlap(),
        multiplicity: inst.integral_multiplicity()?,
        demand: demand.entries().to_vec(),
        leaders: leaders.users().to_vec(),
        combination_count: tx.combination_count(),
        dropped_combinations: cmd.drop_last,
        load: display(&load),
        load_float: to_f64(&load),
        expected_load: display(&expected),
        load_matches: load == expected,
        all_decoded,
        users: decode
            .users
            .iter()
            .map(|u| UserOut {
                user: u.user,
                file: demand.file_of(u.user),
                desired: u.desired,
                recovered: u.recovered,
                missing: u.missing.iter().map(|s| s.to_string()).collect(),
            })
            .collect(),
    };
    emit(&cmd.out, &json_doc(&report))?;
    if all_decoded {
        eprintln!("verify: every user decoded, load {}", display(&load));
        Ok(EXIT_OK)
    } else {
        let short = report.users.iter().filter(|u| !u.missing.is_empty()).count();
        eprintln!("verify: {short} user(s) could not decode");
        Ok(EXIT_VERIFY)
    }
}

fn run_sweep(cmd: SweepCmd) -> Result<u8, AppError> {
    let report = sweep_verify(cmd.max_files, cmd.max_users)?;
    let mut csv = String::from(
        "N,K,r,t,demands,decode_failures,load_mismatches,worst_load,worst_load_float,optimal_proven,status\n",
    );
    for cell in &report.cells {
        let pass =
            cell.decode_failures == 0 && cell.load_mismatches == 0 && cell.worst_load_matches;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.n_files,
            cell.n_users,
            cell.overlap,
            cell.t,
            cell.demands_checked,
            cell.decode_failures,
            cell.load_mismatches,
            display(&cell.worst_load),
            to_f64(&cell.worst_load),
            if cell.proven_optimal_all_demands { "yes" } else { "no" },
            if pass { "pass" } else { "fail" },
        ));
    }
    emit(&cmd.out, &csv)?;
    eprintln!(
        "sweep: {} cells, {} demand deliveries, {} failure(s)",
        report.cells.len(),
        report.demands_checked,
        report.total_failures()
    );
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_VERIFY })
}

#[derive(Serialize)]
struct MultiUserOut {
    user: u32,
    demand: Vec<u32>,
    desired: usize,
    recovered: usize,
    missing: Vec<String>,
}

#[derive(Serialize)]
struct MultiCaseOut {
    case: &'static str,
    description: &'static str,
    n_files: u32,
    n_users: u32,
    demands: Vec<Vec<u32>>,
    leaders: Vec<u32>,
    rows: Vec<Vec<String>>,
    load: String,
    load_float: f64,
    prior_load: String,
    prior_load_float: f64,
    improves_prior: bool,
    all_decoded: bool,
    users: Vec<MultiUserOut>,
}

fn run_multireq(cmd: MultireqCmd) -> Result<u8, AppError> {
    let ids: Vec<CaseId> = match cmd.case {
        Some(id) => vec![id],
        None => CaseId::ALL.to_vec(),
    };
    let mut failures = 0usize;
    let mut cases = Vec::with_capacity(ids.len());
    for id in ids {
        let c = case(id);
        let verdict = verify_case(&c)?;
        if !verdict.all_decoded() {
            failures += 1;
        }
        cases.push(MultiCaseOut {
            case: id.slug(),
            description: id.describe(),
            n_files: c.n_files,
            n_users: c.n_users,
            demands: c.demands.iter().map(|d| d.iter().collect()).collect(),
            leaders: c.leaders.clone(),
            rows: c
                .rows
                .iter()
                .map(|row| row.iter().map(|s| s.to_string()).collect())
                .collect(),
            load: display(&verdict.load),
            load_float: to_f64(&verdict.load),
            prior_load: display(&c.prior_load),
            prior_load_float: to_f64(&c.prior_load),
            improves_prior: verdict.load < c.prior_load,
            all_decoded: verdict.all_decoded(),
            users: verdict
                .users
                .iter()
                .zip(c.demands.iter())
                .map(|(u, d)| MultiUserOut {
                    user: u.user,
                    demand: d.iter().collect(),
                    desired: u.desired,
                    recovered: u.recovered,
                    missing: u.missing.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
        });
    }
    emit(&cmd.out, &json_doc(&cases))?;
    if failures == 0 {
        eprintln!("multireq: {} case(s) decoded", cases.len());
        Ok(EXIT_OK)
    } else {
        eprintln!("multireq: {failures} case(s) failed to decode");
        Ok(EXIT_VERIFY)
    }
}

fn csv_rat(r: &Rat) -> (String, f64) {
    (display(r), to_f64(r))
}

fn run_curve(cmd: CurveCmd) -> Result<u8, AppError> {
    let (n, k, r) = (cmd.inst.n_files, cmd.inst.n_users, cmd.inst.overlap);
    let s = cmd.type_s.unwrap_or_else(|| n.min(k));
    let env = converse_envelope_type(n, k, r, s)?;
    let avg_env = if cmd.average {
        Some(converse_envelope_average(n, k, r)?)
    } else {
        None
    };
    // Baseline demand: cycle through the first s files.
    let baseline_demand: Vec<u32> = (0..k).map(|u| u % s + 1).collect();
    let mut csv = String::from("M,load,t,s_or_avg,kind,M_float,load_float,status\n");
    for t in 0..=k {
        let mem = corner_memory(n, k, r, t);
        let (m_txt, m_f) = csv_rat(&mem);
        let (c_txt, c_f) = csv_rat(&env.eval(&mem)?);
        csv.push_str(&format!("{m_txt},{c_txt},{t},{s},converse,{m_f},{c_f},\n"));
        let (a_txt, a_f) = csv_rat(&load_coefficient(n, k, r, t, s)?);
        let status = if cell_optimality_proven(n, k, r, t, s) {
            "verified"
        } else {
            "unverified"
        };
        csv.push_str(&format!("{m_txt},{a_txt},{t},{s},scheme,{m_f},{a_f},{status}\n"));
        let inst = ProblemInstance::new(n, k, mem.clone(), r)?;
        let demand = Demand::new(&inst, baseline_demand.clone())?;
        let (b_txt, b_f) = csv_rat(&baseline_round_division_load(&inst, &demand)?);
        csv.push_str(&format!("{m_txt},{b_txt},{t},{s},baseline,{m_f},{b_f},\n"));
    }
    if let Some(avg) = avg_env {
        for t in 0..=k {
            let mem = corner_memory(n, k, r, t);
            let (m_txt, m_f) = csv_rat(&mem);
            let (v_txt, v_f) = csv_rat(&avg.eval(&mem)?);
            csv.push_str(&format!("{m_txt},{v_txt},{t},avg,converse,{m_f},{v_f},\n"));
        }
    }
    emit(&cmd.out, &csv)?;
    Ok(EXIT_OK)
}
