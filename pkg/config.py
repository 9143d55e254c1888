import os


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value else default


def _env_float(name, default):
    value = os.environ.get(name)
    return float(value) if value else default


class Config:
    # Simulator and oracle capacity limits
    SIM_MAX_QUBITS = _env_int('PAINTSEQ_MAX_QUBITS', 26)
    ENUMERATION_CAP = _env_int('PAINTSEQ_ENUMERATION_CAP', 10)
    QUBO_EXHAUSTIVE_MAX_BITS = _env_int('PAINTSEQ_QUBO_MAX_BITS', 16)

    # QAOA defaults
    QAOA_LEVELS = _env_int('PAINTSEQ_QAOA_LEVELS', 3)
    QAOA_SHOTS = _env_int('PAINTSEQ_QAOA_SHOTS', 4096)
    QAOA_GRID = _env_int('PAINTSEQ_QAOA_GRID', 32)
    QAOA_RESTARTS = _env_int('PAINTSEQ_QAOA_RESTARTS', 4)
    QAOA_MAX_ITERATIONS = _env_int('PAINTSEQ_QAOA_MAX_ITERATIONS', 400)
    QAOA_TOLERANCE = _env_float('PAINTSEQ_QAOA_TOLERANCE', 1e-6)
    QAOA_SEED = _env_int('PAINTSEQ_SEED', 0)
    QAOA_WORKERS = _env_int('PAINTSEQ_WORKERS', 1)

    TOP_K = _env_int('PAINTSEQ_TOP_K', 10)
    LOG_LEVEL = os.environ.get('PAINTSEQ_LOG_LEVEL') or 'INFO'


class DevelopmentConfig(Config):
    LOG_LEVEL = os.environ.get('PAINTSEQ_LOG_LEVEL') or 'DEBUG'


class ProductionConfig(Config):
    pass


class TestingConfig(Config):
    LOG_LEVEL = 'WARNING'
    QAOA_WORKERS = 1


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': ProductionConfig
}
