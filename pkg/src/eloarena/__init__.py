"""Elo tournaments over dataset instances, turning pairwise LLM judgments into thresholdable scores."""

__version__ = "0.1.0"

from .errors import (
    ArenaError,
    CheckpointError,
    CurveUndefinedError,
    DomainError,
    JudgeSetupError,
    ParseError,
    TemplateError,
    ValidationError,
)
from .ingest import Instance, load_cola_tsv, load_jsonl, synthetic_dataset
from .judging import (
    ChatClient,
    JudgeKind,
    JudgeSpec,
    MatchRecord,
    Outcome,
    classify_single,
    judge_pair,
)
from .metrics import (
    CurveReport,
    ScoredInstance,
    auroc,
    best_f1_threshold,
    classification_report,
    curve_report,
    pr_curve_and_auprc,
    roc_curve,
)
from .prompts import (
    BUILTIN_TEMPLATES,
    Choice,
    Label,
    PromptStyle,
    PromptTemplate,
    extract_choice,
    extract_label,
    render_pairwise_prompt,
)
from .rating import EloConfig, Rating, expected_score, init_ratings, rating_to_score, update_pair
from .scheduling import (
    MatchHistory,
    RoundSchedule,
    SchedulerKind,
    record_round,
    schedule_graph,
    schedule_random,
    schedule_swiss,
)
from .tournament import (
    TournamentConfig,
    TournamentState,
    checkpoint_roundtrip,
    load_checkpoint,
    run_round,
    run_tournament,
    save_checkpoint,
)

__all__ = [
    "ArenaError",
    "BUILTIN_TEMPLATES",
    "ChatClient",
    "CheckpointError",
    "Choice",
    "CurveReport",
    "CurveUndefinedError",
    "DomainError",
    "EloConfig",
    "Instance",
    "JudgeKind",
    "JudgeSetupError",
    "JudgeSpec",
    "Label",
    "MatchHistory",
    "MatchRecord",
    "Outcome",
    "ParseError",
    "PromptStyle",
    "PromptTemplate",
    "Rating",
    "RoundSchedule",
    "SchedulerKind",
    "ScoredInstance",
    "TemplateError",
    "TournamentConfig",
    "TournamentState",
    "ValidationError",
    "auroc",
    "best_f1_threshold",
    "checkpoint_roundtrip",
    "classification_report",
    "classify_single",
    "curve_report",
    "expected_score",
    "extract_choice",
    "extract_label",
    "init_ratings",
    "judge_pair",
    "load_checkpoint",
    "load_cola_tsv",
    "load_jsonl",
    "pr_curve_and_auprc",
    "rating_to_score",
    "record_round",
    "render_pairwise_prompt",
    "roc_curve",
    "run_round",
    "run_tournament",
    "save_checkpoint",
    "schedule_graph",
    "schedule_random",
    "schedule_swiss",
    "synthetic_dataset",
    "update_pair",
]
