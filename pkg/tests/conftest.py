import pytest

from jchnet import _pykernels

try:
    from jchnet import _kernels
except ImportError:  # extension not built
    _kernels = None

KERNEL_BACKENDS = [pytest.param(_pykernels, id="python")]
if _kernels is not None:
    KERNEL_BACKENDS.append(pytest.param(_kernels, id="cython"))

_ACCEPTANCE = []


def record_criterion(number, passed, detail):
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    _ACCEPTANCE.append(line)
    print(line)


@pytest.fixture(params=KERNEL_BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
