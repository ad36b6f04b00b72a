"""Monte Carlo BER engine: scenarios, baselines, sweeps and reports."""

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .codes import log2_exact
from .errors import ConfigError, ProbabilityOverflow
from .kernels import LinkSetup, simulate_range
from .phy import ChannelConfig, Fec, Modulation, SnrReference
from .tree import CodeTree, NodeAddress, TrafficClass

MT = TrafficClass.MACHINE_TYPE
BE = TrafficClass.BEST_EFFORT
PROPOSED = "proposed"
HADAMARD_BASELINE = "hadamard_baseline"
CHUNK = 4096


@dataclass(frozen=True)
class UserSpec:
    id: int
    traffic_class: TrafficClass
    sending_probability: float
    code: NodeAddress = None
    fec: Fec = Fec.NONE
    modulation: Modulation = Modulation.QPSK

    def __post_init__(self):
        if not 0.0 <= self.sending_probability <= 1.0:
            raise ConfigError(f"user {self.id}: sending probability {self.sending_probability} outside [0, 1]")
        object.__setattr__(self, "traffic_class", TrafficClass.parse(self.traffic_class))
        object.__setattr__(self, "fec", Fec.parse(self.fec))
        object.__setattr__(self, "modulation", Modulation.parse(self.modulation))
        if self.code is not None:
            object.__setattr__(self, "code", NodeAddress(*self.code))


@dataclass(frozen=True)
class ScenarioConfig:
    sf: int = 8
    users: tuple = ()
    channel: ChannelConfig = ChannelConfig()
    iterations: int = 10_000
    packet_bits: int = 128
    seed: int = 0
    mode: str = PROPOSED

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        log2_exact(self.sf)
        if self.iterations < 1:
            raise ConfigError("iterations must be positive")
        if self.packet_bits < 1:
            raise ConfigError("packet_bits must be positive")
        if self.mode not in (PROPOSED, HADAMARD_BASELINE):
            raise ConfigError(f"unknown mode {self.mode!r}")
        for u in self.users:
            if u.fec.coded_length(self.packet_bits) % u.modulation.bits_per_symbol:
                raise ConfigError(f"user {u.id}: coded packet length not divisible by bits per symbol")
        ids = [u.id for u in self.users]
        if len(set(ids)) != len(ids):
            raise ConfigError("user ids must be distinct")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def users_of(self, traffic_class):
        return [u for u in self.users if u.traffic_class is traffic_class]


def table_setup(**overrides):
    """Default scenario: 4 MT + 6 BE users, SF 8, QPSK, uncoded, chip-SNR 10 dB."""
    params = dict(n_mt=4, n_be=6, sending_probability=0.5, fec=Fec.NONE,
                  modulation=Modulation.QPSK)
    for key in list(params):
        if key in overrides:
            params[key] = overrides.pop(key)
    users = make_users(params["n_mt"], params["n_be"], params["sending_probability"],
                       fec=params["fec"], modulation=params["modulation"])
    overrides.setdefault("channel", ChannelConfig(10.0, SnrReference.CHIP))
    return ScenarioConfig(users=users, **overrides)


def make_users(n_mt, n_be, sending_probability, fec=Fec.NONE, modulation=Modulation.QPSK):
    classes = [MT] * n_mt + [BE] * n_be
    return tuple(
        UserSpec(i, c, sending_probability, fec=fec, modulation=modulation)
        for i, c in enumerate(classes)
    )


def build_tree(sf):
    layer = log2_exact(sf)
    # swap enumeration is exhaustive, so larger trees only carry base codes
    return CodeTree(layer, "all" if layer <= 5 else 0)


def resolve_codes(cfg):
    """Return ``(cfg, tree)`` with every user bound to a tree node.

    Explicit codes are placed first; the rest are allocated in user order
    (machine-type users on the upper half, best-effort users base-first).
    """
    tree = build_tree(cfg.sf)
    for u in cfg.users:
        if u.code is not None:
            tree.assign(u.code, u.traffic_class, u.id)
    users = []
    for u in cfg.users:
        if u.code is None:
            u = dataclasses.replace(u, code=tree.allocate(u.traffic_class, user_id=u.id))
        users.append(u)
    return cfg.replace(users=tuple(users)), tree


def link_setup(cfg):
    cfg, tree = resolve_codes(cfg)
    users = cfg.users
    return cfg, LinkSetup(
        codes=[tree.code_of(u.code) for u in users],
        user_ids=[u.id for u in users],
        p_send=[u.sending_probability for u in users],
        bits_per_symbol=[u.modulation.bits_per_symbol for u in users],
        use_fec=[u.fec is Fec.CONV_HALF for u in users],
        packet_bits=cfg.packet_bits,
        n0=cfg.channel.n0(cfg.sf),
    )


@dataclass(frozen=True)
class Tally:
    transmitted_bits: int = 0
    bit_errors: int = 0

    @property
    def ber(self):
        if self.transmitted_bits == 0:
            return None
        return self.bit_errors / self.transmitted_bits

    @property
    def stderr(self):
        p = self.ber
        if p is None:
            return None
        return math.sqrt(p * (1.0 - p) / self.transmitted_bits)

    def __add__(self, other):
        return Tally(self.transmitted_bits + other.transmitted_bits,
                     self.bit_errors + other.bit_errors)


@dataclass(frozen=True)
class BerReport:
    """Bit tallies per user and per class.

    ``ber_paper_norm`` divides errors by every bit that *could* have been
    sent (iterations x users x packet bits) rather than by bits sent.
    """

    per_user: dict
    user_class: dict
    iterations: int
    packet_bits: int
    mode: str = PROPOSED
    classes: tuple = field(default=(MT, BE))

    def tally(self, traffic_class=None):
        ids = [i for i, c in self.user_class.items()
               if traffic_class is None or c is TrafficClass.parse(traffic_class)]
        total = Tally()
        for i in ids:
            total = total + self.per_user[i]
        return total

    def n_users(self, traffic_class=None):
        return sum(1 for c in self.user_class.values()
                   if traffic_class is None or c is TrafficClass.parse(traffic_class))

    def ber(self, traffic_class=None):
        return self.tally(traffic_class).ber

    def stderr(self, traffic_class=None):
        return self.tally(traffic_class).stderr

    def no_transmissions(self, traffic_class):
        return self.tally(traffic_class).transmitted_bits == 0

    def ber_paper_norm(self, traffic_class=None):
        denom = self.iterations * self.n_users(traffic_class) * self.packet_bits
        return self.tally(traffic_class).bit_errors / denom if denom else None

    def as_dict(self):
        def entry(t, norm):
            return {"transmitted_bits": t.transmitted_bits, "bit_errors": t.bit_errors,
                    "ber": t.ber, "stderr": t.stderr, "ber_paper_norm": norm}

        classes = {}
        for c in self.classes:
            t = self.tally(c)
            d = entry(t, self.ber_paper_norm(c))
            d["n_users"] = self.n_users(c)
            d["no_transmissions"] = t.transmitted_bits == 0
            classes[c.value] = d
        per_iter_user = self.iterations * self.packet_bits
        users = {
            str(i): dict(entry(t, t.bit_errors / per_iter_user), traffic_class=self.user_class[i].value)
            for i, t in sorted(self.per_user.items())
        }
        return {"mode": self.mode, "iterations": self.iterations,
                "packet_bits": self.packet_bits, "classes": classes, "users": users}


def _chunks(start, stop, size=CHUNK):
    return [(lo, min(stop, lo + size)) for lo in range(start, stop, size)]


def simulate_counts(cfg, start=0, stop=None, workers=1, setup=None):
    """Summed per-user ``(tx, err)`` arrays over iterations ``start..stop-1``.

    Integer sums of independent chunks: identical for any ``workers``.
    """
    if setup is None:
        cfg, setup = link_setup(cfg)
    stop = cfg.iterations if stop is None else stop
    chunks = _chunks(start, stop)
    tx = np.zeros(setup.n_users, dtype=np.int64)
    err = np.zeros(setup.n_users, dtype=np.int64)
    if workers and workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: simulate_range(setup, cfg.seed, *c), chunks))
    else:
        results = [simulate_range(setup, cfg.seed, lo, hi) for lo, hi in chunks]
    for t, e in results:
        tx += t
        err += e
    return tx, err


def run_iteration(cfg, iteration_index):
    """Per-user ``(transmitted_bits, bit_errors)`` for one iteration."""
    cfg, setup = link_setup(cfg)
    tx, err = simulate_range(setup, cfg.seed, iteration_index, iteration_index + 1)
    return [(int(t), int(e)) for t, e in zip(tx, err)]


def _report(cfg, tx, err, iterations):
    return BerReport(
        per_user={u.id: Tally(int(t), int(e)) for u, t, e in zip(cfg.users, tx, err)},
        user_class={u.id: u.traffic_class for u in cfg.users},
        iterations=iterations,
        packet_bits=cfg.packet_bits,
        mode=cfg.mode,
    )


def run_scenario(cfg, workers=1):
    cfg, setup = link_setup(cfg)
    tx, err = simulate_counts(cfg, workers=workers, setup=setup)
    return _report(cfg, tx, err, cfg.iterations)


class IncrementalRun:
    """A scenario whose iteration count can be extended without re-simulating."""

    def __init__(self, cfg, workers=1):
        self.cfg, self.setup = link_setup(cfg)
        self.workers = workers
        self.done = 0
        self.tx = np.zeros(self.setup.n_users, dtype=np.int64)
        self.err = np.zeros(self.setup.n_users, dtype=np.int64)

    def extend_to(self, iterations):
        if iterations > self.done:
            t, e = simulate_counts(self.cfg, self.done, iterations, self.workers, self.setup)
            self.tx += t
            self.err += e
            self.done = iterations
        return self.report()

    def report(self):
        return _report(self.cfg, self.tx, self.err, self.done)


def adjusted_sending_probability(n_u, n_h, p_s):
    """``(n_u / n_h) * p_s``: per-user load that keeps total traffic equal."""
    if n_h < 1:
        raise ValueError("n_h must be at least 1")
    if not 0.0 <= p_s <= 1.0:
        raise ValueError("p_s must lie in [0, 1]")
    p = n_u / n_h * p_s
    if p > 1.0:
        raise ProbabilityOverflow(f"{n_u}/{n_h} x {p_s} = {p} > 1")
    return p


def hadamard_baseline_scenario(cfg):
    """Pure Hadamard reference: ``sf`` users on distinct leaves, same offered load."""
    if not cfg.users:
        raise ConfigError("baseline needs at least one user")
    probs = {u.sending_probability for u in cfg.users}
    if len(probs) != 1:
        raise ConfigError("baseline requires a uniform sending probability")
    p = adjusted_sending_probability(len(cfg.users), cfg.sf, probs.pop())
    template = cfg.users[0]
    layer = log2_exact(cfg.sf)
    users = tuple(
        UserSpec(i, MT, p, NodeAddress(layer, i, 0), template.fec, template.modulation)
        for i in range(cfg.sf)
    )
    return cfg.replace(users=users, mode=HADAMARD_BASELINE)


def with_num_best_effort(cfg, n_be):
    """Replace the best-effort population by ``n_be`` users, codes reallocated base-first."""
    mt = cfg.users_of(MT)
    be = cfg.users_of(BE)
    template = be[0] if be else (mt[0] if mt else UserSpec(0, BE, 0.5))
    users = [dataclasses.replace(u, code=None) for u in mt]
    next_id = max((u.id for u in cfg.users), default=-1) + 1
    keep = [dataclasses.replace(u, code=None) for u in be[:n_be]]
    extra = [
        UserSpec(next_id + k, BE, template.sending_probability, None, template.fec, template.modulation)
        for k in range(max(0, n_be - len(be)))
    ]
    return cfg.replace(users=tuple(users + keep + extra))


def with_sending_probability(cfg, p):
    return cfg.replace(users=tuple(dataclasses.replace(u, sending_probability=p) for u in cfg.users))


def with_snr(cfg, snr_db):
    return cfg.replace(channel=dataclasses.replace(cfg.channel, snr_db=float(snr_db)))


SWEEPS = {
    "snr_db": with_snr,
    "sending_probability": with_sending_probability,
    "num_best_effort_users": lambda cfg, n: with_num_best_effort(cfg, int(n)),
}


@dataclass(frozen=True)
class SweepPoint:
    value: float
    report: BerReport
    baseline: BerReport = None


def run_sweep(base, parameter, values, workers=1, baseline=None):
    """One scenario per value with only ``parameter`` changed.

    SNR sweeps also run the Hadamard baseline unless ``baseline=False``.
    """
    if parameter not in SWEEPS:
        raise ConfigError(f"unknown sweep parameter {parameter!r}")
    if baseline is None:
        baseline = parameter == "snr_db"
    points = []
    for v in values:
        cfg = SWEEPS[parameter](base, v)
        ref = run_scenario(hadamard_baseline_scenario(cfg), workers) if baseline else None
        points.append(SweepPoint(v, run_scenario(cfg, workers), ref))
    return points


def _steps(lo, hi, n):
    return [round(lo + (hi - lo) * k / (n - 1), 10) for k in range(n)]


SNR_VALUES = [float(v) for v in range(0, 21)]
PS_VALUES = _steps(0.0, 1.0, 11)
NBE_VALUES = list(range(1, 9))


@dataclass(frozen=True)
class SweepSeries:
    label: str
    parameter: str
    points: list


def run_preset(name, base=None, workers=1):
    """Named sweeps over the default scenario; returns a list of series."""
    base = table_setup() if base is None else base
    if name == "fig4":
        return [SweepSeries("sf8", "snr_db", run_sweep(base, "snr_db", SNR_VALUES, workers))]
    if name == "fig5":
        return [SweepSeries("sf8", "sending_probability",
                            run_sweep(base, "sending_probability", PS_VALUES, workers))]
    if name == "fig6":
        return [SweepSeries("sf8", "num_best_effort_users",
                            run_sweep(base, "num_best_effort_users", NBE_VALUES, workers))]
    if name == "fig7":
        uncoded = base.replace(users=tuple(
            dataclasses.replace(u, fec=Fec.NONE, code=None) for u in base.users))
        coded = uncoded.replace(users=tuple(
            dataclasses.replace(u, fec=Fec.CONV_HALF) for u in uncoded.users))
        series = [
            SweepSeries(f"sf{base.sf}", "sending_probability",
                        run_sweep(uncoded, "sending_probability", PS_VALUES, workers)),
            SweepSeries(f"sf{2 * base.sf}", "sending_probability",
                        run_sweep(uncoded.replace(sf=2 * base.sf), "sending_probability",
                                  PS_VALUES, workers)),
            SweepSeries(f"sf{base.sf}_fec", "sending_probability",
                        run_sweep(coded, "sending_probability", PS_VALUES, workers)),
        ]
        overlay = []
        for p in PS_VALUES:
            cfg = with_sending_probability(uncoded, p)
            try:
                ref = hadamard_baseline_scenario(cfg)
            except ProbabilityOverflow:
                continue
            overlay.append(SweepPoint(p, run_scenario(ref, workers)))
        series.append(SweepSeries(f"hadamard_sf{base.sf}", "sending_probability", overlay))
        return series
    raise ConfigError(f"unknown preset {name!r}")


def q_function(x):
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def analytic_single_user_ber(snr_db, sf, scheme=Modulation.QPSK, reference=SnrReference.CHIP):
    """Bit error probability of one interference-free user in AWGN.

    With unit chip energy, chip reference gives ``Es/N0 = sf * snr``.
    Gray QPSK: ``Q(sqrt(Es/N0))`` per bit; BPSK: ``Q(sqrt(2 Es/N0))``.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    snr = 10.0 ** (snr_db / 10.0)
    es_n0 = snr * sf if SnrReference.parse(reference) is SnrReference.CHIP else snr
    if Modulation.parse(scheme) is Modulation.BPSK:
        return q_function(math.sqrt(2.0 * es_n0))
    return q_function(math.sqrt(es_n0))
