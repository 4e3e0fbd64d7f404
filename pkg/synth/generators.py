"""Synthetic mingling data with planted coordination, turn-taking and quality labels."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import signal

from ingest.loaders import write_accel, write_annotations, write_groups, write_speaking
from ingest.models import AccelRecording, AnnotationSet, ConversationGroup, ConversationSlice, SpeakingStatus
from ingest.questionnaire import GROUP, INDIVIDUAL, LIKERT_MAX, LIKERT_MIN, default_items
from ingest.slicing import slice_conversations
from .scenario import ScenarioConfig

logger = logging.getLogger(__name__)

BURN_IN = 200
CONVERGENCE_OFFSET = 2.0
SELECTION_GAIN = 5.0


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def ar1(n: int, coef: float, rng, axes: int = 3) -> np.ndarray:
    """Unit-variance AR(1) process, one column per axis."""
    rng = _rng(rng)
    white = rng.standard_normal((n + BURN_IN, axes))
    series = signal.lfilter([np.sqrt(1.0 - coef ** 2)], [1.0, -coef], white, axis=0)
    return series[BURN_IN:]


def coupled_follower(
    base: np.ndarray,
    lag: int,
    coupling: float,
    sigma: float,
    rng,
    ar_coef: float = 0.95,
    convergence_rate: float = 0.0,
) -> np.ndarray:
    """Follower trace b_t = c * a_{t-lag} + (1 - c) * noise_t.

    ``base`` holds ``lag`` samples of history ahead of the leader's trace.
    A positive convergence rate adds an offset that decays over the trace.
    """
    n = base.shape[0] - lag
    delayed_base = base[:n]
    noise = sigma * ar1(n, ar_coef, rng, base.shape[1])
    follower = coupling * delayed_base + (1.0 - coupling) * noise
    if convergence_rate > 0:
        t = np.arange(n) / n
        follower = follower + CONVERGENCE_OFFSET * np.exp(-convergence_rate * t)[:, None]
    return follower


def gen_coupled_pair(
    lag: int,
    coupling: float,
    sigma: float,
    n_samples: int,
    seed=0,
    ar_coef: float = 0.95,
    convergence_rate: float = 0.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Leader and follower tri-axial traces with a planted delay and coupling.

    Args:
        lag: Delay of the follower in samples
        coupling: Coupling strength c in [0, 1]
        sigma: Scale of the follower's independent noise
        n_samples: Trace length
        seed: Seed or Generator
        ar_coef: AR(1) coefficient of the smooth base process
        convergence_rate: Decay rate of the follower's initial offset

    Returns:
        (leader, follower) arrays of shape (n_samples, 3)
    """
    rng = _rng(seed)
    lag = int(lag)
    base = ar1(n_samples + lag, ar_coef, rng)
    leader = base[lag:]
    follower = coupled_follower(base, lag, coupling, sigma, rng, ar_coef, convergence_rate)
    return leader, follower


@dataclass
class TurnScript:
    """Generated speaking statuses with the planted interruptions."""

    statuses: Dict[str, np.ndarray]
    successful: Dict[str, int]
    unsuccessful: Dict[str, int]
    target_shares: Dict[str, float]


def target_shares(n_members: int, skew: float) -> np.ndarray:
    """Speaking shares proportional to exp(skew * z), z from 1 down to -1."""
    weights = np.exp(skew * np.linspace(1.0, -1.0, n_members))
    return weights / weights.sum()


def gen_turn_sequence(
    n_members: int,
    skew: float,
    interruption_rate: float,
    n_samples: int,
    seed=0,
    rate_hz: float = 20.0,
    mean_turn_s: float = 3.0,
    member_ids: Optional[Sequence[str]] = None,
    gap_threshold_ms: float = 500.0,
) -> TurnScript:
    """Floor-holding chain with planted interruptions.

    The next floor holder is drawn with probability proportional to the
    target share, boosted for members below their share so far. Turns are
    separated by silences longer than the gap threshold. With probability
    ``interruption_rate`` per minute of turn, a partner starts speaking
    inside the turn: successful interruptions outlast the holder and take
    the floor, unsuccessful ones stop before the holder does.
    """
    if n_members < 2:
        raise ValueError('a conversation needs at least 2 members')
    rng = _rng(seed)
    ids = list(member_ids) if member_ids is not None else [f"p{k}" for k in range(n_members)]
    shares = target_shares(n_members, skew)
    statuses = {pid: np.zeros(n_samples, dtype=np.int8) for pid in ids}
    spoken = np.zeros(n_members)
    successful = {pid: 0 for pid in ids}
    unsuccessful = {pid: 0 for pid in ids}

    min_gap = int(round(gap_threshold_ms / 1000.0 * rate_hz)) + 2
    t = int(rng.integers(0, min_gap))
    while t < n_samples:
        achieved = spoken / max(spoken.sum(), 1.0)
        p = shares * np.exp(SELECTION_GAIN * (shares - achieved) / shares)
        holder = int(rng.choice(n_members, p=p / p.sum()))
        length = max(int(round(rng.exponential(mean_turn_s) * rate_hz)), 2)
        start, end = t, min(t + length, n_samples)
        statuses[ids[holder]][start:end] = 1
        spoken[holder] += end - start
        t = end + min_gap + int(rng.geometric(1.0 / max(rate_hz / 2.0, 1.0)))

        duration = end - start
        if duration < 2 * rate_hz or end >= n_samples:
            continue
        if rng.random() >= min(1.0, interruption_rate * duration / rate_hz / 60.0):
            continue
        partner = int(rng.choice([k for k in range(n_members) if k != holder]))
        onset = start + int(rng.integers(max(duration // 4, 1), max(3 * duration // 4, 2)))
        if rng.random() < 0.5:
            finish = end + int(rng.integers(int(rate_hz), int(3 * rate_hz) + 1))
            if finish >= n_samples:
                continue
            successful[ids[partner]] += 1
            t = finish + min_gap + int(rng.geometric(1.0 / max(rate_hz / 2.0, 1.0)))
        else:
            finish = min(onset + int(rng.integers(int(rate_hz // 2), int(1.5 * rate_hz) + 1)), end - 1)
            if finish <= onset:
                continue
            unsuccessful[ids[partner]] += 1
        statuses[ids[partner]][onset:finish] = 1
        spoken[partner] += finish - onset

    return TurnScript(statuses, successful, unsuccessful, dict(zip(ids, shares)))


@dataclass(frozen=True)
class GroupPlan:
    """Planted parameters of one synthetic group."""

    group_id: str
    member_ids: Tuple[str, ...]
    n_samples: int
    lag: int
    coupling: float
    convergence_rate: float
    equality_skew: float
    interruption_rate: float
    quality: float

    @property
    def cardinality(self) -> int:
        return len(self.member_ids)

    @property
    def label(self) -> int:
        return int(self.quality > 3.0)


def latent_quality(cfg: ScenarioConfig, cardinality: int, coupling: float, skew: float, rng) -> float:
    """Planted PCQ on the 1..5 scale for the configured label rule."""
    if cfg.label_rule == 'coupling':
        quality = 3.0 + 2.0 * (coupling - cfg.coupling_threshold) / max(cfg.coupling_threshold, 1 - cfg.coupling_threshold)
    elif cfg.label_rule == 'coupling_and_equality':
        high = coupling >= cfg.coupling_threshold and skew <= cfg.skew_threshold
        quality = 3.0 + (1.0 if high else -1.0) * (0.5 + abs(coupling - cfg.coupling_threshold))
    else:
        quality = 4.5 - 0.5 * (cardinality - 2) + 0.3 * rng.standard_normal()
    return float(np.clip(quality, LIKERT_MIN, LIKERT_MAX))


def plan_groups(cfg: ScenarioConfig) -> List[GroupPlan]:
    """Draw the planted parameters of every group from the master seed."""
    rng = np.random.default_rng(cfg.seed)
    sizes = np.array(sorted(cfg.cardinality_weights))
    weights = np.array([cfg.cardinality_weights[s] for s in sizes], dtype=float)
    plans = []
    for g in range(cfg.n_groups):
        cardinality = int(rng.choice(sizes, p=weights / weights.sum()))
        gid = f"G{g + 1:03d}"
        coupling = float(rng.uniform(*cfg.coupling))
        skew = float(rng.uniform(*cfg.equality_skew))
        plans.append(GroupPlan(
            group_id=gid,
            member_ids=tuple(f"{gid}P{m + 1}" for m in range(cardinality)),
            n_samples=int(round(rng.uniform(*cfg.duration_s) * cfg.rate_hz)),
            lag=int(round(rng.uniform(*cfg.lag_samples))),
            coupling=coupling,
            convergence_rate=float(rng.uniform(*cfg.convergence_rate)),
            equality_skew=skew,
            interruption_rate=float(rng.uniform(*cfg.interruption_rate)),
            quality=latent_quality(cfg, cardinality, coupling, skew, rng),
        ))
    return plans


def _simulate_group(cfg: ScenarioConfig, plan: GroupPlan, total: int, seed: np.random.SeedSequence):
    """Accel and speaking arrays of every member over the whole recording."""
    rng = np.random.default_rng(seed)
    n = plan.n_samples
    base = ar1(n + plan.lag, cfg.ar_coef, rng)
    accel = {}
    for k, pid in enumerate(plan.member_ids):
        if k == 0:
            inside = base[plan.lag:]
        else:
            inside = coupled_follower(base, plan.lag, plan.coupling, cfg.noise_sigma, rng,
                                      cfg.ar_coef, plan.convergence_rate)
        outside = ar1(total - n, cfg.ar_coef, rng) if total > n else np.empty((0, 3))
        accel[pid] = np.round(np.vstack([inside, outside]), 6)

    script = gen_turn_sequence(
        plan.cardinality, plan.equality_skew, plan.interruption_rate, n, rng,
        cfg.rate_hz, cfg.mean_turn_s, plan.member_ids,
    )
    speaking = {pid: np.concatenate([status, np.zeros(total - n, dtype=np.int8)])
                for pid, status in script.statuses.items()}
    return accel, speaking, script


def _item_offsets(n_items: int) -> np.ndarray:
    # Fixed spread across items keeps every rating vector non-constant.
    return np.linspace(-0.9, 0.9, n_items)[np.argsort(np.arange(n_items) * 7 % n_items)]


def rate_items(quality: float, negative: Sequence[bool], bias: float, noise: float, rng) -> np.ndarray:
    """Item ratings of one rater consistent with a latent quality."""
    flags = np.asarray(negative, dtype=bool)
    latent = quality + _item_offsets(flags.size) + bias + noise * rng.standard_normal(flags.size)
    values = np.clip(np.round(latent), LIKERT_MIN, LIKERT_MAX).astype(int)
    return np.where(flags, LIKERT_MIN + LIKERT_MAX - values, values)


def simulate_annotations(
    cfg: ScenarioConfig,
    plans: Sequence[GroupPlan],
    slices: Sequence[ConversationSlice],
) -> Tuple[AnnotationSet, AnnotationSet, pd.DataFrame]:
    """Group- and individual-level ratings plus the planted member qualities."""
    rng = np.random.default_rng([cfg.seed, 1])
    by_group = {p.group_id: p for p in plans}
    raters = [f"R{r + 1}" for r in range(cfg.n_raters)]
    biases = {r: 0.5 * cfg.rater_noise * rng.standard_normal() for r in raters}
    member_quality = {
        pid: float(np.clip(p.quality + 0.25 * cfg.rater_noise * rng.standard_normal(), LIKERT_MIN, LIKERT_MAX))
        for p in plans for pid in p.member_ids
    }

    rows = {GROUP: [], INDIVIDUAL: []}
    for level in (GROUP, INDIVIDUAL):
        items = default_items(level)
        negative = [i.is_negative for i in items]
        for rater in raters:
            for s in slices:
                targets = [('', by_group[s.group_id].quality)] if level == GROUP else [
                    (pid, member_quality[pid]) for pid in s.member_ids
                ]
                for pid, quality in targets:
                    ratings = rate_items(quality, negative, biases[rater], cfg.rater_noise, rng)
                    rows[level].append([rater, s.slice_id, pid] + ratings.tolist())

    sets = []
    for level in (GROUP, INDIVIDUAL):
        items = default_items(level)
        columns = ['rater_id', 'slice_id', 'participant_id'] + [i.item_id for i in items]
        sets.append(AnnotationSet(level, items, pd.DataFrame(rows[level], columns=columns)))
    members = pd.DataFrame(sorted(member_quality.items()), columns=['participant_id', 'quality'])
    return sets[0], sets[1], members


@dataclass
class SynthDataset:
    """In-memory synthetic dataset and where it was written."""

    cfg: ScenarioConfig
    plans: List[GroupPlan]
    accel: Dict[str, AccelRecording]
    speaking: Dict[str, SpeakingStatus]
    groups: List[ConversationGroup]
    slices: List[ConversationSlice]
    group_annotations: AnnotationSet
    individual_annotations: AnnotationSet
    ground_truth: pd.DataFrame
    interruptions: pd.DataFrame
    paths: Dict[str, Path] = field(default_factory=dict)


def gen_mini_mingle(cfg: ScenarioConfig, out_dir=None, workers: int = 1) -> SynthDataset:
    """Generate a complete dataset and optionally write it in the input formats.

    Args:
        cfg: Scenario configuration
        out_dir: Directory for the files, or None to keep it in memory
        workers: Parallel workers over groups

    Returns:
        SynthDataset
    """
    cfg.validate()
    plans = plan_groups(cfg)
    total = max(p.n_samples for p in plans)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(plans))
    if workers > 1:
        simulated = Parallel(n_jobs=workers)(
            delayed(_simulate_group)(cfg, plan, total, seed) for plan, seed in zip(plans, seeds)
        )
    else:
        simulated = [_simulate_group(cfg, plan, total, seed) for plan, seed in zip(plans, seeds)]

    t = np.arange(total)
    accel, speaking, planted = {}, {}, []
    for plan, (plan_accel, plan_speaking, script) in zip(plans, simulated):
        for pid in plan.member_ids:
            accel[pid] = AccelRecording(pid, cfg.rate_hz, t, plan_accel[pid])
            speaking[pid] = SpeakingStatus(pid, cfg.rate_hz, plan_speaking[pid], 0)
            planted.append({
                'group_id': plan.group_id,
                'participant_id': pid,
                'target_share': script.target_shares[pid],
                'n_success_intr': script.successful[pid],
                'n_unsuccess_intr': script.unsuccessful[pid],
            })

    groups = [ConversationGroup(p.group_id, p.member_ids, 0, p.n_samples) for p in plans]
    slices = slice_conversations(groups, cfg.slice_len_s, cfg.min_dur_s, cfg.rate_hz)
    group_ann, indiv_ann, _ = simulate_annotations(cfg, plans, slices)
    truth = pd.DataFrame([{
        'group_id': p.group_id,
        'cardinality': p.cardinality,
        'lag': p.lag,
        'coupling': p.coupling,
        'convergence_rate': p.convergence_rate,
        'equality_skew': p.equality_skew,
        'interruption_rate': p.interruption_rate,
        'quality': p.quality,
        'label': p.label,
    } for p in plans])

    dataset = SynthDataset(
        cfg, plans, accel, speaking, groups, slices, group_ann, indiv_ann, truth, pd.DataFrame(planted),
    )
    logger.info(
        "Generated %d groups, %d participants, %d slices (%d high-quality groups)",
        len(groups), len(accel), len(slices), int(truth['label'].sum()),
    )
    if out_dir is not None:
        dataset.paths = write_dataset(dataset, out_dir)
    return dataset


def write_dataset(dataset: SynthDataset, out_dir) -> Dict[str, Path]:
    """Write the dataset files, the ground-truth sidecars and a matching pipeline config."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        'accel': out / 'accel.csv',
        'speaking': out / 'speaking.csv',
        'groups': out / 'groups.csv',
        'group_annotations': out / 'group_annotations.csv',
        'individual_annotations': out / 'individual_annotations.csv',
        'ground_truth': out / 'ground_truth.csv',
        'interruptions': out / 'planted_interruptions.csv',
        'config': out / 'convq.cfg',
    }
    write_accel(dataset.accel.values(), paths['accel'])
    write_speaking(dataset.speaking.values(), paths['speaking'])
    write_groups(dataset.groups, paths['groups'])
    write_annotations(dataset.group_annotations, paths['group_annotations'])
    write_annotations(dataset.individual_annotations, paths['individual_annotations'])
    dataset.ground_truth.to_csv(paths['ground_truth'], index=False, lineterminator='\n')
    dataset.interruptions.to_csv(paths['interruptions'], index=False, lineterminator='\n')

    cfg = dataset.cfg
    lines = [
        f"# synthetic scenario seed={cfg.seed} label_rule={cfg.label_rule}",
        'ACCEL_PATH=accel.csv',
        'SPEAKING_PATH=speaking.csv',
        'GROUPS_PATH=groups.csv',
        'GROUP_ANNOTATIONS_PATH=group_annotations.csv',
        'INDIVIDUAL_ANNOTATIONS_PATH=individual_annotations.csv',
        f"ACCEL_RATE_HZ={cfg.rate_hz:g}",
        f"SPEAKING_RATE_HZ={cfg.rate_hz:g}",
        f"CLOCK_RATE_HZ={cfg.rate_hz:g}",
        f"SLICE_LEN_S={cfg.slice_len_s:g}",
        f"MIN_DUR_S={cfg.min_dur_s:g}",
        'OUTPUT_DIR=output',
    ]
    paths['config'].write_text('\n'.join(lines) + '\n', encoding='utf-8')
    logger.info("Wrote synthetic dataset to %s", out)
    return paths
