"""Prompt templates, rendering and answer extraction.

Placeholders are written ``{name}`` with ``name`` an identifier. Any other
brace usage (such as the JSON skeleton inside the pairwise prompts) is left
alone, so template bodies never need escaping.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from .errors import TemplateError, ValidationError

PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


class Choice(str, Enum):
    A = "A"
    B = "B"


class Label(str, Enum):
    POS = "POS"
    NEG = "NEG"


class PromptStyle(str, Enum):
    PLAIN = "plain"
    PRECISION = "precision"
    RECALL = "recall"


@dataclass(frozen=True)
class ExtractionRule:
    """A regex with a named group ``choice``; the captured token is looked up in the template's choice map."""

    pattern: str

    def search(self, text: str) -> str | None:
        m = re.search(self.pattern, text, flags=re.IGNORECASE | re.MULTILINE)
        return m.group("choice").lower() if m else None


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    body: str
    extraction: tuple[ExtractionRule, ...] = ()
    choices: Mapping[str, str] = field(default_factory=dict)
    structured_keys: tuple[str, ...] = ("choice", "answer", "label")
    positive_class: str | None = None
    negative_class: str | None = None

    def placeholders(self) -> list[str]:
        return list(dict.fromkeys(PLACEHOLDER.findall(self.body)))

    @classmethod
    def from_file(cls, path, kind: str = "pairwise", positive: str = "Yes", negative: str = "No") -> "PromptTemplate":
        """Load a plain-text template body; ``kind`` selects the extraction rules."""
        path = Path(path)
        body = path.read_text(encoding="utf-8")
        if kind == "pairwise":
            return pairwise_template(path.stem, body)
        if kind == "single":
            return single_template(path.stem, body, positive, negative)
        raise ValidationError(f"unknown template kind {kind!r}; expected 'pairwise' or 'single'")


def render(tpl: PromptTemplate, values: Mapping[str, str]) -> str:
    def sub(m: re.Match) -> str:
        key = m.group(1)
        if key not in values:
            raise TemplateError(key, tpl.name)
        return str(values[key])

    return PLACEHOLDER.sub(sub, tpl.body)


def pairwise_values(a_fields: Mapping[str, str], b_fields: Mapping[str, str]) -> dict[str, str]:
    """Slot 1 gets ``a``'s fields suffixed with 1, slot 2 gets ``b``'s suffixed with 2."""
    values = {f"{k}1": v for k, v in a_fields.items()}
    values.update({f"{k}2": v for k, v in b_fields.items()})
    return values


def _structured_value(text: str, keys: tuple[str, ...]) -> str | None:
    candidates = [text.strip()]
    candidates += re.findall(r"```(?:json)?\s*(.*?)```", text, flags=re.DOTALL)
    candidates += re.findall(r"\{[^{}]*\}", text)
    for c in candidates:
        try:
            obj = json.loads(c)
        except (json.JSONDecodeError, ValueError):
            continue
        if not isinstance(obj, dict):
            continue
        lowered = {str(k).lower(): v for k, v in obj.items()}
        for k in keys:
            if k in lowered and isinstance(lowered[k], (str, int, bool)):
                return str(lowered[k])
    return None


def extract(response: str, tpl: PromptTemplate) -> str | None:
    """Map a raw response to one of the template's choice values, or None.

    A JSON object carrying one of ``structured_keys`` is consulted first;
    its value is matched with the same rules. Otherwise the rules run in
    order over the whole response and the first match decides.
    """
    if not isinstance(response, str) or not response:
        return None
    value = _structured_value(response, tpl.structured_keys)
    for text in ([value] if value is not None else []) + [response]:
        for rule in tpl.extraction:
            token = rule.search(text)
            if token is not None and token in tpl.choices:
                return tpl.choices[token]
    return None


def extract_choice(response: str, tpl: PromptTemplate) -> Choice | None:
    out = extract(response, tpl)
    return Choice(out) if out in ("A", "B") else None


def extract_label(response: str, tpl: PromptTemplate) -> Label | None:
    out = extract(response, tpl)
    return Label(out) if out in ("POS", "NEG") else None


_SLOT = r"(?:sentence|pair)\s*(?P<choice>[12])\b"
PAIRWISE_RULES = (
    ExtractionRule(r"""["']?(?:choice|answer)["']?\s*[:=]\s*["']?\s*""" + _SLOT),
    ExtractionRule(r"\A\W*" + _SLOT),
    ExtractionRule(r"\b" + _SLOT),
)


def pairwise_template(name: str, body: str) -> PromptTemplate:
    return PromptTemplate(name, body, PAIRWISE_RULES, {"1": "A", "2": "B"})


def single_template(name: str, body: str, positive: str, negative: str) -> PromptTemplate:
    alt = f"{re.escape(positive)}|{re.escape(negative)}"
    rules = (
        ExtractionRule(rf"""["']?(?:answer|label|choice)["']?\s*[:=]\s*["']?\s*(?P<choice>{alt})\b"""),
        ExtractionRule(rf"\A\W*(?P<choice>{alt})\b"),
        ExtractionRule(rf"\b(?P<choice>{alt})\b"),
    )
    return PromptTemplate(
        name, body, rules, {positive.lower(): "POS", negative.lower(): "NEG"},
        positive_class=positive, negative_class=negative,
    )


def steering_sentence(tpl: PromptTemplate, style: PromptStyle) -> str:
    if style is PromptStyle.PLAIN:
        return ""
    if tpl.positive_class is None or tpl.negative_class is None:
        raise ValidationError(f"template {tpl.name!r} has no class names for prompt steering")
    worse, better = (
        (tpl.positive_class, tpl.negative_class)
        if style is PromptStyle.PRECISION
        else (tpl.negative_class, tpl.positive_class)
    )
    return (
        f"The consequences for wrongly guessing {worse} are worse than "
        f"the consequences for wrongly guessing {better}."
    )


def render_single(tpl: PromptTemplate, fields: Mapping[str, str], style: PromptStyle = PromptStyle.PLAIN) -> str:
    text = render(tpl, fields)
    extra = steering_sentence(tpl, PromptStyle(style))
    return f"{text}\n\n{extra}" if extra else text


COLA_SINGLE = single_template(
    "cola_single",
    'Please read the following sentence and decide whether it is "acceptable" in a linguistic '
    'sense (i.e., grammatical). Don\'t explain your reasoning, just answer "Yes" (acceptable) or '
    '"No" (unacceptable) on a new line. {text}',
    "Yes",
    "No",
)

CLINIFACT_SINGLE = single_template(
    "clinifact_single",
    "Instruction: Given a scientific claim and an abstract, determine if the abstract reports "
    "positive results (TRUE) or not (FALSE) about the claim. The task is to classify the pair "
    "claim abstract as follows: TRUE: if the abstract provides positive support for the claim. "
    "FALSE: if the abstract provides negative or inconclusive support for the claim or if the "
    "abstract provides contextual or background information without directly reporting results "
    "about the claim.{text}",
    "TRUE",
    "FALSE",
)

COLA_PAIRWISE = pairwise_template(
    "cola_pairwise",
    "You are an expert linguist deciding whether sentences are grammatically acceptable or not. "
    "Your task is to take in a pair of sentences and decide which is more acceptable. The output "
    'format should be {"choice": <Sentence>, "reasoning": <your reasoning>}, where <Sentence> '
    "should be the more acceptable or less unacceptable sentence, either \"Sentence 1\" or "
    '"Sentence 2". Here are the two sentences.\n'
    "\n"
    "Sentence 1: {text1}\n"
    "\n"
    "Sentence 2: {text2}",
)

CLINIFACT_PAIRWISE = pairwise_template(
    "clinifact_pairwise",
    "You are a biomedical researcher evaluating whether given scientific claims and their "
    "corresponding abstracts report positive results (TRUE) or not (FALSE). If an abstract "
    "presents inconclusive findings or does not provide information relevant to the claim, the "
    "answer is FALSE. Your task is to compare two claim-abstract pairs and determine which one is "
    'more likely to be classified as TRUE. If both pairs should be answered "TRUE", choose the one '
    'with higher confidence. The output format should be {"choice": <Pair>, "reasoning": <your '
    'reasoning>}, where <Pair> should be the claim abstract pair more likely to have the answer '
    'TRUE, either "Pair 1" or "Pair 2". Here are the two questions.\n'
    "\n"
    "Pair 1: {text1}\n"
    "\n"
    "Pair 2: {text2}",
)

BUILTIN_TEMPLATES = {
    t.name: t for t in (COLA_SINGLE, CLINIFACT_SINGLE, COLA_PAIRWISE, CLINIFACT_PAIRWISE)
}


def get_template(name_or_path: str, kind: str = "pairwise", positive: str = "Yes", negative: str = "No") -> PromptTemplate:
    if name_or_path in BUILTIN_TEMPLATES:
        return BUILTIN_TEMPLATES[name_or_path]
    path = Path(name_or_path)
    if not path.is_file():
        raise ValidationError(
            f"unknown template {name_or_path!r}; use a file path or one of {sorted(BUILTIN_TEMPLATES)}"
        )
    return PromptTemplate.from_file(path, kind, positive, negative)


def render_pairwise_prompt(tpl: PromptTemplate, a, b) -> str:
    """Fill ``tpl`` with ``a`` in slot 1 and ``b`` in slot 2 (instances or field mappings)."""
    a_fields = getattr(a, "fields", a)
    b_fields = getattr(b, "fields", b)
    return render(tpl, pairwise_values(a_fields, b_fields))
