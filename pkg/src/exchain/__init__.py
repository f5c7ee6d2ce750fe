"""Exception-knowledge toolkit for LLM-generated Java code.

Builds an API exception-knowledge base from documentation pages, statically
checks generated Java for exception-handling quality, and drives an
iterative generate/check/rewrite prompt chain until the code is clean.
"""

from .analysis import (
    AnalysisReport,
    CallSite,
    HandlingStatus,
    QualityLabel,
    Resolution,
    SourceContext,
    UnhandledException,
    analyze_source,
    classify_quality,
    collect_unhandled,
    detect_handling,
    extract_invocations,
    resolve,
)
from .chain import (
    ChainConfig,
    ChainResult,
    CodingTask,
    DeterministicChecker,
    LlmChecker,
    Termination,
    extract_code_block,
    normalize_code,
    run_chain,
)
from .client import (
    Cassette,
    CassetteEntry,
    ChatMessage,
    ChatRequest,
    ClientMode,
    LlmClient,
    canonical_key,
)
from .evaluation import (
    LoopStats,
    QualityMatrix,
    llm_eva,
    load_corpus,
    loop_stats,
    quality_matrix,
    read_result_records,
    sample_tasks,
)
from .javadoc import parse_api_page, parse_throws_clause
from .kb import (
    ApiEntry,
    ExceptionHierarchy,
    ExceptionSpec,
    KnowledgeBase,
    build_knowledge_base,
    default_hierarchy,
    is_subtype,
    kb_load,
    kb_lookup,
    kb_save,
)
from .prompts import (
    GENERAL_EXCEPTION_PROMPT,
    PromptMode,
    build_check_prompts,
    build_exception_prompt,
    rephrase_task,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport", "ApiEntry", "CallSite", "Cassette", "CassetteEntry",
    "ChainConfig", "ChainResult", "ChatMessage", "ChatRequest", "ClientMode",
    "CodingTask", "DeterministicChecker", "ExceptionHierarchy", "ExceptionSpec",
    "GENERAL_EXCEPTION_PROMPT", "HandlingStatus", "KnowledgeBase", "LlmChecker",
    "LlmClient", "LoopStats", "PromptMode", "QualityLabel", "QualityMatrix",
    "Resolution", "SourceContext", "Termination", "UnhandledException",
    "analyze_source", "build_check_prompts", "build_exception_prompt",
    "build_knowledge_base", "canonical_key", "classify_quality",
    "collect_unhandled", "default_hierarchy", "detect_handling",
    "extract_code_block", "extract_invocations", "is_subtype", "kb_load",
    "kb_lookup", "kb_save", "llm_eva", "load_corpus", "loop_stats",
    "normalize_code", "parse_api_page", "parse_throws_clause",
    "quality_matrix", "read_result_records", "rephrase_task", "resolve",
    "run_chain", "sample_tasks",
]
