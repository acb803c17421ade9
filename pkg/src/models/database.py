"""Database models for stored verification runs."""

import json
from datetime import datetime
from typing import List, Optional
from sqlalchemy import create_engine, Column, Integer, String, DateTime, Text, Boolean, Float, ForeignKey
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import sessionmaker, Session
from src.models.reports import RunReport
from src.utils.config import config

Base = declarative_base()

class Run(Base):
    """Model for one harness run."""
    __tablename__ = 'runs'
    
    id = Column(Integer, primary_key=True)
    started_at = Column(DateTime, default=datetime.utcnow)
    config_json = Column(Text, nullable=False)
    
    # Outcome
    passed = Column(Boolean, default=False)
    total_records = Column(Integer, default=0)
    failed_records = Column(Integer, default=0)
    runtime_seconds = Column(Float)

class SuiteRecord(Base):
    """Model for one (suite, seed) record of a run."""
    __tablename__ = 'suite_records'
    
    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('runs.id'), nullable=False)
    suite = Column(String(50), nullable=False)
    seed = Column(Integer, nullable=False)
    residual = Column(Float, nullable=False)
    tolerance = Column(Float, nullable=False)
    passed = Column(Boolean, nullable=False)
    skipped = Column(Boolean, default=False)
    parameters_json = Column(Text)  # JSON string of the record parameters and residual parts

class DatabaseManager:
    """Database manager for handling all database operations."""
    
    def __init__(self, database_url: Optional[str] = None):
        self.engine = create_engine(database_url or config.database_url)
        Base.metadata.create_all(self.engine)
        self.SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=self.engine,
                                         expire_on_commit=False)
    
    def get_session(self) -> Session:
        """Get a database session."""
        return self.SessionLocal()
    
    def save_run(self, report: RunReport, started_at: Optional[datetime] = None) -> Run:
        """Store a run and all of its records."""
        with self.get_session() as session:
            run = Run(
                started_at=started_at or datetime.utcnow(),
                config_json=json.dumps(report.config, sort_keys=True),
                passed=report.passed,
                total_records=len(report.records),
                failed_records=len(report.failed_records),
                runtime_seconds=report.total_runtime_seconds
            )
            session.add(run)
            session.flush()
            for record in report.records:
                session.add(SuiteRecord(
                    run_id=run.id,
                    suite=record.suite,
                    seed=record.seed,
                    residual=record.residual,
                    tolerance=record.tolerance,
                    passed=record.passed,
                    skipped=record.skipped,
                    parameters_json=json.dumps({'parameters': record.parameters,
                                                'residuals': record.residuals,
                                                'error': record.error}, sort_keys=True, default=str)
                ))
            session.commit()
            session.refresh(run)
            return run
    
    def recent_runs(self, limit: int = 10) -> List[Run]:
        """Most recent runs first."""
        with self.get_session() as session:
            return session.query(Run).order_by(Run.started_at.desc(), Run.id.desc()).limit(limit).all()
    
    def get_run(self, run_id: int) -> Optional[Run]:
        with self.get_session() as session:
            return session.query(Run).filter(Run.id == run_id).first()
    
    def get_records(self, run_id: int, failed_only: bool = False) -> List[SuiteRecord]:
        """Records of a run in (suite, seed) order."""
        with self.get_session() as session:
            query = session.query(SuiteRecord).filter(SuiteRecord.run_id == run_id)
            if failed_only:
                query = query.filter(SuiteRecord.passed == False)
            return query.order_by(SuiteRecord.id).all()

# Global database manager instance
db = DatabaseManager()
