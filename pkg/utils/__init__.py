# Utils package
# Contains samplers, estimators, predictors, Orlicz machinery and file export
