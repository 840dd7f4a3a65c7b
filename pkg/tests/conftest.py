import json

import pytest

from mmee.gateway import ModelGateway, ScriptedBackend
from mmee.schema import bundled_schema_path, load_schema

FIG1_SENTENCE = "Taleban insurgents fight government forces in Kabul."
FIG1_IMAGE = "img1.jpg"
FIG1_BOX = [120.0, 80.0, 360.0, 240.0]


@pytest.fixture(scope="session")
def schema():
    return load_schema(bundled_schema_path())


@pytest.fixture
def singleton_schema(tmp_path):
    path = tmp_path / "one.json"
    path.write_text(
        json.dumps(
            {
                "types": [
                    {
                        "id": "Conflict.Attack",
                        "definition": "a violent act",
                        "roles": [{"name": "Target", "definition": "who is attacked"}],
                    }
                ]
            }
        )
    )
    return load_schema(path)


def fig1_script() -> dict:
    """Canned responses for the attack-example document end to end."""
    table = {
        "chat|doc1|etsgp": "Attack; fight",
        "ground|img1.jpg|machine gun": FIG1_BOX,
    }
    role_answers = {
        "Attacker": "None <seg> None",
        "Target": "Taleban insurgents <seg> None",
        "Instrument": "None <seg> machine gun",
        "Victim": "None <seg> None",
        "Place": "None <seg> None",
    }
    for role, answer in role_answers.items():
        table[f"chat|doc1|arsgp|Conflict.Attack|fight|{role}"] = answer
    return table


def fig1_gold_row() -> dict:
    start = FIG1_SENTENCE.index("fight")
    return {
        "doc_id": "doc1",
        "events": [
            {
                "type": "Conflict.Attack",
                "trigger": {"start": start, "end": start + 5, "surface": "fight"},
                "args": [
                    {"role": "Target", "text": {"surface": "Taleban insurgents"}, "region": None},
                    {"role": "Instrument", "text": None, "region": {"box": FIG1_BOX}},
                ],
            }
        ],
    }


def fig1_corpus_row() -> dict:
    return {"id": "doc1", "sentence": FIG1_SENTENCE, "image": FIG1_IMAGE}


@pytest.fixture
def fig1_gateway():
    return ModelGateway(ScriptedBackend(fig1_script()))
