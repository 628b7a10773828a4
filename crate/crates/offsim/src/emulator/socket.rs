//! Socket-mode harness: a real client/server round over TCP on the frame
//! format from [`wire`](super::wire).
//!
//! The client performs real timed waits for its compute and preprocessing
//! stages, waits the constant uplink overhead, then streams the zero-filled
//! task frame shaped by a token bucket. The server drains the task, waits
//! the remote compute time from its own profile, writes the result header,
//! waits the constant downlink overhead, and streams the padded result
//! shaped at the downlink rate. Stage boundaries in the returned trace are
//! the client's wall-clock observations; the jitter spec is ignored in this
//! mode (the transport supplies its own variance).
//!
//! The server handles one connection at a time.

use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::profiles::{ExecutionPlan, SystemProfile};
use crate::scalar::Scalar;

use super::bucket::TokenBucket;
use super::wire::{self, FrameHeader, MsgType, HEADER_LEN};
use super::{EmulationConfig, EmulationTrace, EmulatorError, Stage, StagePlan, TraceEvent};

/// Shaping chunk; also the bucket burst, so a refill grants one chunk.
const CHUNK: usize = 4096;
const ZEROES: [u8; CHUNK] = [0u8; CHUNK];

fn sleep_s(seconds: f64) {
    if seconds > 0.0 {
        thread::sleep(Duration::from_secs_f64(seconds));
    }
}

fn elapsed_ps(t0: Instant) -> u64 {
    (t0.elapsed().as_nanos() as u64).saturating_mul(1000)
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(
        e.kind(),
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
    )
}

/// Writes `total` bytes (the first `prefix.len()` from `prefix`, zeros after
/// that) through the token bucket.
fn shaped_write(
    stream: &mut TcpStream,
    bucket: &mut TokenBucket,
    t0: Instant,
    prefix: &[u8],
    total: u64,
) -> io::Result<()> {
    let mut written = 0u64;
    while written < total {
        let len = CHUNK.min((total - written) as usize);
        loop {
            let wait = bucket.request((len * 8) as f64, t0.elapsed().as_secs_f64());
            if wait == 0.0 {
                break;
            }
            sleep_s(wait);
        }
        if written < prefix.len() as u64 {
            let from = written as usize;
            let end = prefix.len().min(from + len);
            stream.write_all(&prefix[from..end])?;
            let rest = len - (end - from);
            if rest > 0 {
                stream.write_all(&ZEROES[..rest])?;
            }
        } else {
            stream.write_all(&ZEROES[..len])?;
        }
        written += len as u64;
    }
    Ok(())
}

fn read_exact_or_timeout(
    stream: &mut TcpStream,
    buf: &mut [u8],
    timeout: Duration,
) -> Result<(), EmulatorError> {
    stream.read_exact(buf).map_err(|e| {
        if is_timeout(&e) {
            EmulatorError::Timeout(timeout)
        } else {
            EmulatorError::Io(e)
        }
    })
}

/// Runs one offloading round against a live server and returns the measured
/// trace. Fully local plans never touch the network.
pub fn emulate_socket<T: Scalar>(
    plan: ExecutionPlan,
    profile: &SystemProfile<T>,
    cfg: &EmulationConfig,
    refined: bool,
) -> Result<EmulationTrace, EmulatorError> {
    let stages = StagePlan::build(plan, profile, refined);
    let ul_rate = cfg.shaping_rate_ul.unwrap_or(stages.ul_rate_bps);
    if !(ul_rate > 0.0) {
        return Err(EmulatorError::InvalidConfig(
            "uplink shaping rate must be > 0".into(),
        ));
    }

    let t0 = Instant::now();
    let mut events = Vec::new();
    let push = |events: &mut Vec<TraceEvent>, stage: Stage| {
        events.push(TraceEvent {
            t_ps: elapsed_ps(t0),
            stage,
        });
    };
    // Anchor the trace at zero explicitly; Instant has already advanced by
    // the time the first event is recorded otherwise.
    events.push(TraceEvent {
        t_ps: 0,
        stage: if stages.local.is_empty() {
            Stage::PrepStart
        } else {
            Stage::SegStart(1)
        },
    });

    for (i, &(constant, work)) in stages.local.iter().enumerate() {
        let segment = i as u32 + 1;
        if segment != 1 {
            push(&mut events, Stage::SegStart(segment));
        }
        sleep_s(constant + work);
        push(&mut events, Stage::SegEnd(segment));
    }

    if !stages.offload {
        push(&mut events, Stage::Done);
        let measured_total_ps = events.last().unwrap().t_ps;
        return Ok(EmulationTrace {
            plan,
            events,
            measured_total_ps,
        });
    }

    if !stages.local.is_empty() {
        push(&mut events, Stage::PrepStart);
    }
    sleep_s(stages.prep_s);
    push(&mut events, Stage::PrepEnd);

    // Uplink: connection setup and the constant network overhead, then the
    // shaped task transfer.
    push(&mut events, Stage::UlStart);
    let addr = resolve(&cfg.endpoint)?;
    let mut stream =
        TcpStream::connect_timeout(&addr, cfg.stage_timeout).map_err(EmulatorError::Connection)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(cfg.stage_timeout))?;
    sleep_s(stages.ul_const_s);

    let header = FrameHeader::new(
        MsgType::Task,
        plan.exit as u8,
        plan.split as u8,
        stages.ul_volume_bytes.saturating_sub(HEADER_LEN as u64),
    );
    let mut bucket = TokenBucket::new(ul_rate, (CHUNK * 8) as f64);
    let total = stages.ul_volume_bytes.max(HEADER_LEN as u64);
    shaped_write(&mut stream, &mut bucket, t0, &header.encode(), total)?;
    stream.flush()?;
    push(&mut events, Stage::UlEnd);

    // Remote window: one aggregated span labeled with the first remote
    // segment; it ends when the result header lands.
    let first_remote = plan.split + 1;
    push(&mut events, Stage::MecStart(first_remote));
    let mut reply = [0u8; HEADER_LEN];
    read_exact_or_timeout(&mut stream, &mut reply, cfg.stage_timeout)?;
    let reply = FrameHeader::decode(&reply)?;
    push(&mut events, Stage::MecEnd(first_remote));

    match reply.msg_type {
        MsgType::Result => {}
        MsgType::Error => {
            let mut message = vec![0u8; reply.payload_len.min(4096) as usize];
            read_exact_or_timeout(&mut stream, &mut message, cfg.stage_timeout)?;
            return Err(EmulatorError::Server(
                String::from_utf8_lossy(&message).into_owned(),
            ));
        }
        MsgType::Task => {
            return Err(EmulatorError::Protocol(super::wire::ProtocolError::BadType(
                MsgType::Task as u8,
            )))
        }
    }

    push(&mut events, Stage::DlStart);
    let mut remaining = reply.payload_len;
    let mut buf = [0u8; CHUNK];
    while remaining > 0 {
        let len = CHUNK.min(remaining as usize);
        read_exact_or_timeout(&mut stream, &mut buf[..len], cfg.stage_timeout)?;
        remaining -= len as u64;
    }
    push(&mut events, Stage::DlEnd);
    push(&mut events, Stage::Done);

    let measured_total_ps = events.last().unwrap().t_ps;
    Ok(EmulationTrace {
        plan,
        events,
        measured_total_ps,
    })
}

fn resolve(endpoint: &str) -> Result<SocketAddr, EmulatorError> {
    endpoint
        .to_socket_addrs()
        .map_err(EmulatorError::Connection)?
        .next()
        .ok_or_else(|| {
            EmulatorError::InvalidConfig(format!("endpoint `{endpoint}` resolves to no address"))
        })
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Downlink shaping rate in bit/s; the profile's downlink bitrate when
    /// absent.
    pub shaping_rate_dl: Option<f64>,
    /// How long to wait for bytes from a connected client.
    pub read_timeout: Duration,
    /// Whether the remote compute time uses the refined model.
    pub refined: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            shaping_rate_dl: None,
            read_timeout: Duration::from_secs(60),
            refined: true,
        }
    }
}

/// Accept loop; returns when `stop` becomes true. Handles one connection at
/// a time and logs one line per completed round.
pub fn run_server(
    listener: TcpListener,
    profile: &SystemProfile<f64>,
    cfg: &ServerConfig,
    stop: &AtomicBool,
    log: &mut dyn Write,
) -> io::Result<()> {
    listener.set_nonblocking(true)?;
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, _peer)) => {
                if let Err(e) = serve_connection(stream, profile, cfg, stop, log) {
                    writeln!(log, "connection error: {e}")?;
                }
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {
                thread::sleep(Duration::from_millis(10));
            }
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

fn serve_connection(
    mut stream: TcpStream,
    profile: &SystemProfile<f64>,
    cfg: &ServerConfig,
    stop: &AtomicBool,
    log: &mut dyn Write,
) -> io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(cfg.read_timeout))?;

    loop {
        if stop.load(Ordering::SeqCst) {
            return Ok(());
        }
        let header = match wire::read_header(&mut stream) {
            Ok(None) => return Ok(()), // client went away
            Ok(Some(Ok(header))) => header,
            Ok(Some(Err(violation))) => {
                writeln!(log, "protocol violation: {violation}")?;
                let _ = wire::write_error(&mut stream, &violation.to_string());
                return Ok(()); // close this connection, keep serving
            }
            Err(e) if is_timeout(&e) => return Ok(()),
            Err(e) => return Err(e),
        };

        if header.msg_type != MsgType::Task {
            writeln!(log, "protocol violation: unexpected message type")?;
            let _ = wire::write_error(&mut stream, "expected a TASK frame");
            return Ok(());
        }
        wire::drain_payload(&mut stream, header.payload_len)?;

        let plan = match ExecutionPlan::checked(
            header.exit as u32,
            header.split as u32,
            &profile.topology,
        ) {
            Ok(plan) => plan,
            Err(e) => {
                writeln!(log, "rejected task: {e}")?;
                let _ = wire::write_error(&mut stream, &e.to_string());
                return Ok(());
            }
        };

        let stages = StagePlan::build(plan, profile, cfg.refined);
        let service_start = Instant::now();
        let t_mec: f64 = stages.mec.iter().map(|&(_, c, w)| c + w).sum();
        sleep_s(t_mec);

        let dl_rate = cfg.shaping_rate_dl.unwrap_or(stages.dl_rate_bps);
        let result_bytes = stages.dl_volume_bytes.max(HEADER_LEN as u64 + 2);
        let payload_len = result_bytes - HEADER_LEN as u64;
        let reply = FrameHeader::new(
            MsgType::Result,
            header.exit,
            header.split,
            payload_len,
        );

        let t0 = Instant::now();
        let mut bucket = TokenBucket::new(dl_rate, (CHUNK * 8) as f64);
        // Header first so the client can bound the remote window, then the
        // constant downlink overhead, then the shaped padding.
        shaped_write(&mut stream, &mut bucket, t0, &reply.encode(), HEADER_LEN as u64)?;
        stream.flush()?;
        sleep_s(stages.dl_const_s);
        let class_id = 0u16.to_le_bytes();
        shaped_write(&mut stream, &mut bucket, t0, &class_id, payload_len)?;
        stream.flush()?;

        writeln!(
            log,
            "round exit={} split={} task_bytes={} result_bytes={} service_ms={:.3}",
            plan.exit,
            plan.split,
            HEADER_LEN as u64 + header.payload_len,
            result_bytes,
            service_start.elapsed().as_secs_f64() * 1e3,
        )?;
        log.flush()?;
    }
}

/// A background server for tests and in-process use.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Signals the accept loop and waits for it to finish.
    pub fn stop(mut self) -> io::Result<()> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> io::Result<()> {
        self.stop.store(true, Ordering::SeqCst);
        match self.join.take() {
            Some(handle) => handle.join().expect("server thread panicked"),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}

/// Binds `endpoint` (use port 0 for an ephemeral port) and serves it on a
/// background thread. Logs are discarded.
pub fn spawn_server(
    profile: SystemProfile<f64>,
    endpoint: &str,
    cfg: ServerConfig,
) -> io::Result<ServerHandle> {
    let listener = TcpListener::bind(endpoint)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let thread_stop = Arc::clone(&stop);
    let join = thread::Builder::new()
        .name("offsim-server".into())
        .spawn(move || run_server(listener, &profile, &cfg, &thread_stop, &mut io::sink()))?;
    Ok(ServerHandle {
        addr,
        stop,
        join: Some(join),
    })
}
