"""Few-shot vulnerability severity assessment pipeline.

Select high-quality demonstrations for a target vulnerability by fusing
code similarity (semantic, syntactic, lexical) with description
similarity, assemble few-shot prompts, query a chat-completion model and
score the predictions against CVSS v3 severity labels.
"""

from .corpus import (
    CorpusSplit,
    SeverityLevel,
    VulnerabilityRecord,
    corpus_stats,
    filter_by_date,
    load_dataset,
    save_dataset,
    severity_from_score,
    stratified_split,
)
from .codeparse import (
    AstSequence,
    parse_to_ast_sequence,
    split_camel_case,
    tokenize_code,
)
from .embedstore import (
    VectorStore,
    WhiteningModel,
    apply_whitening,
    fit_whitening,
    load_vectors,
    save_vectors,
)
from .similarity import (
    DemoRepository,
    DemonstrationSet,
    SimilarityBreakdown,
    code_sim,
    fused_sim,
    lex_sim,
    select_demonstrations,
    sem_dist,
    syn_sim,
    text_sim,
)
from .prompting import (
    OrderingStrategy,
    PromptBundle,
    build_prompt,
    estimate_tokens,
    order_demos,
)
from .llmclient import (
    AssessmentResult,
    LlmClient,
    ProviderConfig,
    ResponseCache,
    assess,
    parse_severity,
)
from .evaluation import (
    ConfusionMatrix,
    MetricsReport,
    RunConfig,
    bucket_by_similarity,
    compute_metrics,
    run_ablation,
    run_experiment,
)

__version__ = "0.1.0"
