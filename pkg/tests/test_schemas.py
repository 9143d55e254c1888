import json
from pathlib import Path

import numpy as np
import pytest

from paintseq import create_settings
from paintseq.errors import InstanceFormatError
from paintseq.fixtures import case_study, tipping_point
from paintseq.models import validate_instance
from paintseq.schemas import InstanceFile, RepairEntry, dump_json, load_instance

INSTANCES = Path(__file__).resolve().parent.parent / 'instances'


@pytest.mark.parametrize('name, fixture', [('case_study.json', case_study),
                                           ('tipping_point.json', tipping_point)])
def test_bundled_files_match_fixtures(name, fixture):
    loaded = load_instance(INSTANCES / name)
    expected = fixture()
    assert loaded.ids == expected.ids
    assert [v.color for v in loaded.vehicles] == [v.color for v in expected.vehicles]
    np.testing.assert_array_equal(loaded.repair_matrix, expected.repair_matrix)
    np.testing.assert_array_equal(loaded.changeover, expected.changeover)
    assert loaded.rates == expected.rates
    assert validate_instance(loaded) == []


def test_from_and_to_aliases():
    entry = RepairEntry.model_validate({'from': 3, 'to': 1, 'p': 0.19})
    assert (entry.current, entry.preceding) == (1, 3)
    assert entry.model_dump(by_alias=True) == {'from': 3, 'to': 1, 'p': 0.19}


def test_instance_round_trip(case):
    text = dump_json(InstanceFile.from_instance(case))
    assert text.endswith('}\n')
    assert '"from": 2' in text
    back = InstanceFile.model_validate_json(text).to_instance()
    np.testing.assert_array_equal(back.pair_costs, case.pair_costs)


def test_attribute_rules_with_default(tmp_path):
    path = tmp_path / 'rules.json'
    path.write_text(json.dumps({
        'vehicles': [
            {'id': 1, 'color': 'red', 'style': 'A'},
            {'id': 2, 'color': 'white', 'style': 'B'},
            {'id': 3, 'color': 'red', 'style': 'B', 'metadata': {'line': 4}},
        ],
        'rates': {'changeover': 20, 'repair': 100},
        'repair_rules': [
            {'to_color': 'white', 'to_style': 'B', 'from_color': 'red', 'from_style': 'A', 'p': 0.3},
        ],
        'repair_probabilities': [{'from': 1, 'to': 3, 'p': 0.5}],
        'default_repair_probability': 0.05,
    }))
    instance = load_instance(path)
    assert instance.repair.probability(2, 1) == 0.3
    assert instance.repair.probability(3, 1) == 0.5
    assert instance.repair.probability(1, 2) == 0.05
    assert instance.vehicles[2].metadata == {'line': 4}
    assert validate_instance(instance) == []


def test_newer_schema_version_is_rejected(tmp_path):
    document = json.loads((INSTANCES / 'case_study.json').read_text())
    document['schema_version'] = 2
    path = tmp_path / 'future.json'
    path.write_text(json.dumps(document))
    with pytest.raises(InstanceFormatError, match='schema_version'):
        load_instance(path)


def test_missing_fields_are_format_errors(tmp_path):
    path = tmp_path / 'partial.json'
    path.write_text('{"vehicles": []}')
    with pytest.raises(InstanceFormatError):
        load_instance(path)
    with pytest.raises(InstanceFormatError):
        load_instance(tmp_path / 'absent.json')


def test_settings_are_read_only_with_overrides():
    settings = create_settings('testing', qaoa_levels=5, top_k=None)
    assert settings['QAOA_LEVELS'] == 5
    assert settings['TOP_K'] == 10
    assert settings['LOG_LEVEL'] == 'WARNING'
    with pytest.raises(TypeError):
        settings['QAOA_LEVELS'] = 1
