"""Offline provider that fabricates deterministic, well-formed responses.

Used to author fixture recordings and to exercise the pipeline without
network access. Responses are pure functions of the prompt text (via a
stable hash), so a recording run and a replay run always agree.
"""
from __future__ import annotations

import hashlib
import json
import re
from typing import Dict, List

from .ledger import TokenUsage
from .provider import GenerationRequest, GenerationResponse, count_tokens

_LABEL_SET = re.compile(r"from \{(.*?)\}\.")
_NEWS_CLAIM = re.compile(r"^# News claim: (?:0\. )?(.*)$", re.MULTILINE)
_SUBCLAIM_ITEM = re.compile(r"(\d+)\. ")
_NODE_LINE = re.compile(r"^Node (\d+) \(Sub-claim \1\):", re.MULTILINE)
_PRIOR = re.compile(r"a veracity label (false|true),")
_REASONED_AS = re.compile(r"reasoned as (\S+?)\.")


def _digest(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


class ScriptedResponder:
    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def generate(self, request: GenerationRequest) -> GenerationResponse:
        text = self.respond(request.prompt_text)
        return GenerationResponse(
            text=text,
            usage=TokenUsage(count_tokens(request.prompt_text), count_tokens(text)),
        )

    def respond(self, prompt: str) -> str:
        d = _digest(f"{self.seed}:{prompt}")
        if prompt.startswith("You are a fake news detection assistant."):
            return self._decomposition(prompt, d)
        if prompt.startswith("You are a graph construction assistant."):
            return self._edges(prompt, d)
        if prompt.startswith("You are a hypergraph construction assistant."):
            return self._hyperedges(prompt, d)
        if prompt.startswith("Given a claim: "):
            return self._rationale(prompt, d)
        if prompt.startswith("Graph used for fake news detection:"):
            return self._label(prompt, d)
        if prompt.startswith("Given a claim, its corresponding claim-centered graph"):
            return self._summary(prompt, d)
        if prompt.startswith("You have been specially designed"):
            return self._background(d)
        if prompt.startswith("You are an impartial judge"):
            return self._judge(d)
        return "Understood."

    def _claim_of(self, prompt: str) -> str:
        match = _NEWS_CLAIM.search(prompt)
        return match.group(1).strip() if match else "the claim"

    def _decomposition(self, prompt: str, d: int) -> str:
        claim = self._claim_of(prompt)
        n = 2 + d % 3
        words = claim.rstrip(".").split() or ["something", "happened"]
        step = max(1, len(words) // n)
        lines = []
        for i in range(n):
            chunk = " ".join(words[i * step : (i + 1) * step]) or words[-1]
            lines.append(f"{i + 1}. The part about {chunk} is asserted as stated.")
        return "\n".join(lines)

    def _subclaim_count(self, prompt: str) -> int:
        for line in prompt.splitlines():
            if line.startswith("# Sub-claims: "):
                indices = [int(m) for m in _SUBCLAIM_ITEM.findall(line)]
                if indices:
                    return max(indices)
        return 2

    def _edges(self, prompt: str, d: int) -> str:
        n = self._subclaim_count(prompt)
        pairs: List[str] = []
        for i in range(1, n + 1):
            if (d >> i) & 1:
                pairs.append(f"({i}, 0)")
        if n >= 2 and d & 1:
            pairs.append("(2, 1)")
        if n >= 3 and d & 4:
            pairs.append(f"({n}, {n - 1})")
        body = ", ".join(pairs)
        return (
            '{"analysis": "Sub-claims were linked by how directly they bear '
            f'on the main statement.", "edges": [{body}]}}'
        )

    def _hyperedges(self, prompt: str, d: int) -> str:
        n = self._subclaim_count(prompt)
        members = sorted({1 + d % n, 1 + (d >> 3) % n})
        group = ", ".join(str(m) for m in members)
        return (
            '{"analysis": "Grouped sub-claims sharing a topic.", '
            f'"hyperedges": [[{group}, 0]]}}'
        )

    def _rationale(self, prompt: str, d: int) -> str:
        match = _PRIOR.search(prompt)
        prior = match.group(1) if match else "false"
        if prior == "true":
            stance = "The accounts line up with the statement on the key points"
        else:
            stance = "The accounts diverge from the statement on the key points"
        qualifier = (
            "and independent details corroborate the timeline",
            "though coverage of the surrounding events is thin",
            "and several outlets report the same figures",
            "while the sourcing behind the figures stays unclear",
        )[d % 4]
        return f"{stance}, {qualifier}. Weight of detail rated {1 + d % 5} of 5."

    def _label(self, prompt: str, d: int) -> str:
        match = _LABEL_SET.search(prompt)
        labels = [part.strip() for part in match.group(1).split(",")] if match else ["false"]
        choice = labels[d % len(labels)]
        if d % 7 == 0:
            return f"I would say the label is {choice}."
        return choice

    def _summary(self, prompt: str, d: int) -> str:
        indices = sorted({int(m) for m in _NODE_LINE.findall(prompt)})
        match = _REASONED_AS.search(prompt)
        label = match.group(1) if match else "half"
        verdicts: Dict[str, Dict[str, str]] = {}
        drop = indices[d % len(indices)] if indices and d % 9 == 0 and "Note:" not in prompt else None
        for i in indices:
            if i == drop:
                continue
            truthy = ((d >> i) & 1) == 1
            verdicts[f"sub-claim {i}"] = {
                "reasoning": f"Part {i} is {'consistent with' if truthy else 'contradicted by'} the retrieved accounts.",
                "prediction": "True" if truthy else "False",
            }
        payload = {
            "sub-claims-veracity": verdicts,
            "final-explanation": (
                f"Taken together the parts point to a {label} call: the better-"
                "grounded readings dominate the weaker ones."
            ),
        }
        if d % 5 == 0:
            return repr(payload)
        return json.dumps(payload, ensure_ascii=False, indent=1)

    def _background(self, d: int) -> str:
        setting = ("a policy dispute", "a viral social media post", "a campaign event", "a scientific report")[d % 4]
        return (
            f"The statement circulated in the context of {setting}; reporting "
            "around it mentions the main participants and a rough timeline."
        )

    def _judge(self, d: int) -> str:
        scores = {
            "misleadingness": 1 + (d >> 2) % 5,
            "informativeness": 1 + (d >> 5) % 5,
            "soundness": 1 + (d >> 8) % 5,
            "readability": 1 + (d >> 11) % 5,
        }
        return json.dumps(scores)
