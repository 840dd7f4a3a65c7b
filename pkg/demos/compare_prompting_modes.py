"""Compare the chat-call budgets of the three prompting modes.

The same document is extracted three ways:

  stepwise  one detection call, then one call per (event, role)
  jmeae     one detection call, then one call per detected event
  jall      a single call covering detection and all arguments

Run with:  python3 demos/compare_prompting_modes.py
"""

from mmee.gateway import ModelGateway, ScriptedBackend
from mmee.orchestrator import Document, ExtractionConfig, extract_document
from mmee.prompts import PromptMode
from mmee.schema import bundled_schema_path, load_schema

SENTENCE = "Police arrested three protesters downtown."

JOINT_BLOCK = (
    "ArrestJail; arrested\n"
    "Agent :: Police <seg> None\n"
    "Person :: three protesters <seg> None\n"
    "Place :: downtown <seg> None"
)

SCRIPT = {
    # Stepwise: detection plus one reply per declared role of the type.
    "chat|d1|etsgp": "ArrestJail; arrested",
    "chat|d1|arsgp|Justice.ArrestJail|arrested|Agent": "Police <seg> None",
    "chat|d1|arsgp|Justice.ArrestJail|arrested|Person": "three protesters <seg> None",
    "chat|d1|arsgp|Justice.ArrestJail|arrested|Instrument": "None <seg> None",
    "chat|d1|arsgp|Justice.ArrestJail|arrested|Place": "downtown <seg> None",
    # Joint per event: detection plus one block reply per detected event.
    "chat|d1|jmeae|Justice.ArrestJail|arrested": JOINT_BLOCK,
    # Joint all: one block reply for the whole document.
    "chat|d1|jall": JOINT_BLOCK,
}


def main() -> None:
    schema = load_schema(bundled_schema_path())
    doc = Document(id="d1", sentence=SENTENCE, image=None)

    for mode in (PromptMode.STEPWISE, PromptMode.JOINT_MEAE, PromptMode.JOINT_ALL):
        gateway = ModelGateway(ScriptedBackend(SCRIPT))
        cfg = ExtractionConfig(mode=mode, grounding=False)
        result = extract_document(doc, schema, gateway, cfg)
        args = sum(len(ev.arguments) for ev in result.events)
        print(f"{mode.value:>8}: {result.chat_calls} chat call(s), "
              f"{len(result.events)} event(s), {args} argument(s)")


if __name__ == "__main__":
    main()
