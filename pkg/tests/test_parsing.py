import random

from hypothesis import given, strategies as st

from mmee.parsing import TextSpan, parse_arsgp, parse_etsgp, normalize_trigger


def test_parse_etsgp_single(schema):
    parsed = parse_etsgp("Attack; fight", schema)
    assert parsed.mentions == [("Conflict.Attack", "fight")]
    assert parsed.diagnostics == []


def test_parse_etsgp_none(schema):
    for response in ("None", "none", " None. ", ""):
        assert parse_etsgp(response, schema).mentions == []


def test_parse_etsgp_two_segments(schema):
    parsed = parse_etsgp("Attack; fight <seg> Transport; evacuate", schema)
    assert parsed.mentions == [("Conflict.Attack", "fight"), ("Movement.Transport", "evacuate")]


def test_parse_etsgp_unknown_type(schema):
    parsed = parse_etsgp("Banana; fight", schema)
    assert parsed.mentions == []
    assert len(parsed.diagnostics) == 1
    assert "unknown event type" in parsed.diagnostics[0]


def test_parse_etsgp_empty_trigger_dropped(schema):
    parsed = parse_etsgp("Attack; ", schema)
    assert parsed.mentions == []
    assert any("empty trigger" in d for d in parsed.diagnostics)


def test_parse_etsgp_deduplicates(schema):
    parsed = parse_etsgp("Attack; fight <seg> Attack; fight", schema)
    assert parsed.mentions == [("Conflict.Attack", "fight")]
    assert any("duplicate" in d for d in parsed.diagnostics)


def test_parse_arsgp_examples():
    assert parse_arsgp("Taleban insurgents <seg> None").text_args == ["Taleban insurgents"]
    assert parse_arsgp("None <seg> machine gun").image_descs == ["machine gun"]
    parsed = parse_arsgp("None <seg> None")
    assert (parsed.text_args, parsed.image_descs) == ([], [])
    parsed = parse_arsgp("soldiers; police <seg> man with rifle")
    assert parsed.text_args == ["soldiers", "police"]
    assert parsed.image_descs == ["man with rifle"]


def test_parse_arsgp_missing_separator():
    parsed = parse_arsgp("soldiers; police")
    assert parsed.text_args == ["soldiers", "police"]
    assert parsed.image_descs == []
    assert any("missing separator" in d for d in parsed.diagnostics)


def test_parse_arsgp_extra_separator_stays_in_image_side():
    parsed = parse_arsgp("a <seg> b <seg> c")
    assert parsed.text_args == ["a"]
    assert parsed.image_descs == ["b <seg> c"]  # only the first separator splits
    assert any("multiple separator" in d for d in parsed.diagnostics)


def test_normalize_trigger():
    assert normalize_trigger("fight", "Soldiers fight insurgents") == TextSpan(9, 14, "fight")
    span = normalize_trigger("Fight", "Soldiers fight insurgents")
    assert (span.start, span.end, span.surface) == (9, 14, "fight")
    assert normalize_trigger("retreat", "Soldiers fight insurgents") is None
    assert normalize_trigger("", "anything") is None


def test_normalize_trigger_first_occurrence():
    span = normalize_trigger("on", "on and on and on")
    assert (span.start, span.end) == (0, 2)


@given(st.text(max_size=80))
def test_parsers_total_over_arbitrary_strings(schema, response):
    etsgp = parse_etsgp(response, schema)
    for type_id, trigger in etsgp.mentions:
        assert type_id in schema
        assert trigger
    arsgp = parse_arsgp(response)
    for item in arsgp.text_args + arsgp.image_descs:
        assert item == item.strip()
        assert item
        assert item.lower() != "none"


def test_parser_fuzz_seeded(schema):
    # Cheap structured fuzz: separator tokens and semicolons spliced randomly.
    rng = random.Random(7)
    pieces = ["<seg>", ";", "Attack", "None", "fight", " ", "\n", "ü", "<", ">", "::"]
    for _ in range(2000):
        s = "".join(rng.choice(pieces) for _ in range(rng.randrange(12)))
        parse_etsgp(s, schema)
        parse_arsgp(s)
