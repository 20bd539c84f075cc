import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wsn_deploy.errors import BadFile, EmptyField, LastSensor
from wsn_deploy.field import SensorField, format_coords, parse_coords, read_coords, remove_sensor

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_defaults_and_flat():
    f = SensorField(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert f.k == 2
    np.testing.assert_array_equal(f.ids, [0, 1])
    np.testing.assert_array_equal(f.flat(), [1, 2, 3, 4])


def test_rejects_bad_coords():
    with pytest.raises(ValueError):
        SensorField(np.array([[0.0, np.inf]]))


def test_remove_keeps_ids():
    f = SensorField(np.arange(8.0).reshape(4, 2))
    g = remove_sensor(f, 1)
    np.testing.assert_array_equal(g.ids, [0, 2, 3])
    np.testing.assert_array_equal(g.coords, [[0, 1], [4, 5], [6, 7]])
    with pytest.raises(IndexError):
        remove_sensor(f, 4)


def test_remove_last_sensor():
    with pytest.raises(LastSensor):
        remove_sensor(SensorField(np.zeros((1, 2))), 0)


@given(arrays(float, st.tuples(st.integers(1, 20), st.just(2)), elements=finite))
def test_csv_round_trip_is_exact(coords):
    f = SensorField(coords)
    g = parse_coords(format_coords(f))
    np.testing.assert_array_equal(g.coords, f.coords)
    np.testing.assert_array_equal(g.ids, f.ids)


def test_csv_schema():
    text = format_coords(SensorField(np.array([[0.5, 1.0]])))
    assert text == "sensor_id,x,y\n0,0.5,1.0\n"


@pytest.mark.parametrize(
    "text",
    [
        "",
        "id,x,y\n0,1,2\n",
        "sensor_id,x,y\n",
        "sensor_id,x,y\n0,1\n",
        "sensor_id,x,y\n0,1,a\n",
        "sensor_id,x,y\n0,1,2\n0,3,4\n",
        "sensor_id,x,y\n0,nan,2\n",
    ],
)
def test_bad_csv(text):
    with pytest.raises(BadFile):
        parse_coords(text)


def test_read_missing(tmp_path):
    with pytest.raises(BadFile):
        read_coords(tmp_path / "nope.csv")
