"""
Prompts and answer extraction
=============================

Built-in templates for the two reference datasets, rendering, steering
sentences, and the extraction of a choice from free-form responses.
"""

# %%
from eloarena import BUILTIN_TEMPLATES, Instance, PromptStyle, extract_choice, extract_label, render_pairwise_prompt
from eloarena.prompts import render_single

pairwise = BUILTIN_TEMPLATES["cola_pairwise"]
a = Instance("0", {"text": "The dog barked."})
b = Instance("1", {"text": "Dog the barked."})
print(render_pairwise_prompt(pairwise, a, b))

# %%
single = BUILTIN_TEMPLATES["cola_single"]
print(render_single(single, a.fields, PromptStyle.RECALL))

# %%
for response in ['{"choice": "Sentence 2", "reasoning": "..."}', "Sentence 1 reads fine.", "no decision"]:
    print(repr(response), "->", extract_choice(response, pairwise))

print(extract_label("No", single), extract_label("TRUE", BUILTIN_TEMPLATES["clinifact_single"]))

# %%
# To judge with a real model, export ARENA_API_KEY and use a remote judge:
#
#   from eloarena import JudgeSpec, JudgeKind, judge_pair
#   spec = JudgeSpec(JudgeKind.REMOTE, endpoint="https://api.openai.com/v1/chat/completions",
#                    model="gpt-4o-mini-2024-07-18")
#   judge_pair(spec, pairwise, a, b)
