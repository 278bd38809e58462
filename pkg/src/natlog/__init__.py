"""Interpretable natural-logic inference over chunked sentence pairs.

The package composes a symbolic seven-relation algebra with a learned
policy: a hypothesis is rewritten chunk by chunk from a premise, each step
labeled with a semantic relation, and the relation sequence is projected
and joined into a final entailment, contradiction, or neutral verdict.
Training uses policy gradients plus an introspective revision step that
repairs sampled programs with lexical knowledge and answer feedback.
"""

from .chunker import ChunkRules, Sentence, chunk, chunk_pair, default_rules, tokenize
from .data import Example, load_dataset, save_dataset
from .datagen import (
    GenSpec,
    Replacement,
    default_genspec,
    generate,
    generate_2hop,
    load_genspec,
    save_genspec,
)
from .executor import (
    Chunk,
    ChunkedPair,
    Trace,
    enumerate_programs,
    execute,
    extract_rationales,
    matches_target,
)
from .knowledge import (
    Lexicon,
    Proposal,
    ProposalQueue,
    align,
    build_queue,
    default_lexicon,
    propose,
)
from .metrics import (
    EvalReport,
    evaluate,
    iou,
    label_accuracy,
    phrasal_prf,
    reports_to_csv,
    state_accuracy,
)
from .policy import (
    FEATURE_NAMES,
    N_ACTIONS,
    N_FEATURES,
    PolicyParams,
    argmax,
    distribution,
    featurize,
    featurize_pair,
    grad_log_prob,
    load_checkpoint,
    sample,
    save_checkpoint,
    step_distributions,
)
from .relations import (
    ACTIONS,
    CONTEXTS,
    ActionRelation,
    NLILabel,
    ProjectivityContext,
    Relation,
    RELATIONS,
    UPWARD,
    group,
    join,
    project,
    reachable,
    reachable_states,
)
from .trainer import (
    IRConfig,
    RewardConfig,
    TrainConfig,
    TrainResult,
    grid_search,
    introspective_revision,
    load_train_config,
    reinforce_objective,
    reward,
    train,
)

__version__ = "0.1.0"
