"""Database configuration and session management for the run registry."""
import logging
import os

from sqlalchemy import create_engine, inspect
from sqlalchemy.orm import declarative_base, sessionmaker

from config import settings

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# SOOT_DATABASE_URL or a local SQLite file
DATABASE_URL = settings.DATABASE_URL or f"sqlite:///{os.path.join(BASE_DIR, 'soot_runs.db')}"


def make_engine(url: str):
    if url.startswith("sqlite"):
        return create_engine(url, connect_args={"check_same_thread": False}, echo=False)
    return create_engine(url, pool_pre_ping=True, echo=False)


engine = make_engine(DATABASE_URL)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base = declarative_base()


def get_db():
    """Dependency to get database session."""
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def init_db(bind=None):
    """Create the registry tables on the given engine (default: the module engine)."""
    logger = logging.getLogger(__name__)
    bind = bind or engine

    # Import models to register them with Base
    from .models import BenchmarkRun, MetricsRecord  # noqa: F401

    try:
        Base.metadata.create_all(bind=bind)
        tables = inspect(bind).get_table_names()
        logger.info(f"✅ Database tables ready: {tables}")
        return True
    except Exception as e:
        logger.error(f"Failed to initialize database: {str(e)}", exc_info=True)
        raise
