# Reduced inverse-cube three-body problem on the pair of pants
