# Pipeline orchestration: configuration, model files, reports and CLI
