"""Text generation plumbing: prompt registry, providers, cache, token ledger."""

from .prompts import TemplateId, PromptTemplate, get_template, render_prompt, render_body
from .ledger import Stage, TokenUsage, TokenLedger, Pricing, estimate_cost
from .provider import (
    GenerationRequest,
    GenerationResponse,
    request_key,
    HttpProvider,
    FixtureProvider,
    RecordingProvider,
    count_tokens,
    fixture_totals,
)
from .cache import ResponseCache
from .gateway import LlmGateway

__all__ = [
    "TemplateId",
    "PromptTemplate",
    "get_template",
    "render_prompt",
    "render_body",
    "Stage",
    "TokenUsage",
    "TokenLedger",
    "Pricing",
    "estimate_cost",
    "GenerationRequest",
    "GenerationResponse",
    "request_key",
    "HttpProvider",
    "FixtureProvider",
    "RecordingProvider",
    "count_tokens",
    "fixture_totals",
    "ResponseCache",
    "LlmGateway",
]
