from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
  threads: int = 1
  log_level: str = "INFO"
  output_dir: str = "out"

  model_config = SettingsConfigDict(
    env_prefix="CCGEN_",
    env_file=".env",
    env_file_empty=True,
    extra="ignore"
  )

settings = Settings()
