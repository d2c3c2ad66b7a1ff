import io
import logging

import numpy as np
import pandas as pd
import pytest

from fdmderham.config import ExperimentConfig
from fdmderham.helper import log as logcollector
from fdmderham.helper.counters import FlopCounter, nbytes
from fdmderham.helper.label import config2label, decomposition2label
from fdmderham.helper.markdown import (ColumnDataType, format_value,
                                       render_report, write_csv)
from fdmderham.helper.params import get_params_str, paramval2str
from fdmderham.helper.rng import make_rng
from fdmderham.tables import TABLES, get_table

import testcommon


RIESZ_ROW = dict(k=1, p=3, level=0, mesh='cartesian', decomposition='sc_ph',
                 factorization='chol', alpha='1', beta='1', iterations=12,
                 converged=True, nnz_total=1234, flops=1.5e6,
                 memory_bytes=20480)


def test_paramval2str():
    assert paramval2str('x', None) == 'None'
    assert paramval2str('x', True) == 'yes'
    assert paramval2str('x', 1e-8) == '1e-08'
    assert paramval2str('x', [3, 5]) == '3,5'


def test_labels():
    config = ExperimentConfig().update(['k=2', 'p=4'])
    assert decomposition2label('sc_pafw') == 'SC-PAFW'
    assert config2label(config) == 'H(div) SC-PH'
    assert config2label(config, params=True) == 'H(div) SC-PH [k: 2/p: 4]'
    assert get_params_str(ExperimentConfig()) == ''


def test_format_value():
    assert format_value(None, ColumnDataType.INT) == '-'
    assert format_value(float('nan'), ColumnDataType.FLOAT) == '-'
    assert format_value(12.0, ColumnDataType.INT) == '12'
    assert format_value(1.5e6, ColumnDataType.SCI) == '1.500e+06'
    assert format_value(False, ColumnDataType.BOOL) == 'no'


def test_tables_registry():
    assert set(TABLES) == {'riesz', 'sweep', 'hodge', 'complexity'}
    title, columns = get_table('riesz', [RIESZ_ROW, RIESZ_ROW])
    assert title == 'CG iteration counts'
    assert [c[0] for c in columns][:2] == ['k', 'p']
    assert all(len(c) == 4 for c in columns)
    with pytest.raises(KeyError):
        get_table('plot', [])


def test_write_csv():
    _, columns = get_table('riesz', [RIESZ_ROW])
    buf = io.StringIO()
    write_csv('riesz', columns, buf)
    text = buf.getvalue()
    assert text.startswith('# fdmderham-table v1 riesz\n')
    frame = pd.read_csv(io.StringIO(text), comment='#')
    assert frame.loc[0, 'iterations'] == 12
    assert frame.loc[0, 'nnz'] == 1234


def test_render_report():
    tables = [get_table('riesz', [RIESZ_ROW])]
    text = render_report(tables, title='Riesz maps', params='k: 1',
                         messages=['WARNING: slow'])
    assert text.startswith('# Riesz maps')
    assert 'Parameters: k: 1' in text
    assert '## CG iteration counts' in text
    assert '| 1 | 3 | 0 | cartesian | sc_ph |' in text
    assert '- WARNING: slow' in text


def test_message_collector():
    names = ['fdmderham.test_helpers']
    collector = logcollector.init_collector(names)
    try:
        logger = logging.getLogger(names[0])
        logger.info('hidden')
        logger.warning('shown')
        assert logcollector.get_messages() == ['WARNING: shown']
        assert logcollector.init_collector(names) is collector
    finally:
        logcollector.remove_collector(names)
    assert logcollector.get_messages() == []


def test_rng_streams():
    a = make_rng(3, 1).uniform(size=4)
    np.testing.assert_array_equal(a, make_rng(3, 1).uniform(size=4))
    assert not np.array_equal(a, make_rng(3, 2).uniform(size=4))
    assert not np.array_equal(a, make_rng(4, 1).uniform(size=4))


def test_counters():
    counter = FlopCounter()
    counter.contraction(10, 3)
    counter.matvec(testcommon.laplacian_1d(4))
    assert counter.flops == 60 + 2 * 10
    counter.reset()
    assert counter.flops == 0
    assert nbytes(np.zeros(4)) == 32
    assert nbytes(None) == 0
    assert nbytes([np.zeros(2), np.zeros(3)]) == 40
